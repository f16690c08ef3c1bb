#pragma once

// Brute-force cross-checks: Monte Carlo rejection sampling and grid
// minimization of h.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "gcdeg/error.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/parallel.hpp"
#include "gcdeg/polytope.hpp"

namespace gcdeg {

struct McConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0x5eed;
  std::vector<std::pair<double, double>> box;  // empty: bounding box of the polytope
};

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t samples = 0;
};

/// splitmix64 evaluated at a counter: stateless, so any sample can be drawn
/// by any thread.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(splitmix64(seed ^ splitmix64(counter)) >> 11) * 0x1.0p-53;
}

inline McResult mc_integrate(const ConvexPolytope& p, const std::function<double(const Vec&)>& integrand,
                             const McConfig& cfg) {
  if (cfg.samples < 10'000) throw Error(ErrorKind::InvalidArgument, "at least 1e4 samples required");
  const std::size_t d = p.dim();
  auto box = cfg.box;
  if (box.empty()) {
    for (std::size_t i = 0; i < d; ++i) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& v : p.vertices_double()) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
      }
      box.push_back({lo, hi});
    }
  }
  if (box.size() != d) throw Error(ErrorKind::InvalidArgument, "box dimension mismatch");
  for (const auto& v : p.vertices_double())
    for (std::size_t i = 0; i < d; ++i)
      if (v[i] < box[i].first - 1e-12 || v[i] > box[i].second + 1e-12)
        throw Error(ErrorKind::BoxTooTight, "sampling box does not contain the polytope");
  double box_volume = 1.0;
  for (const auto& [lo, hi] : box) box_volume *= hi - lo;

  Mat<double> normals;
  Vec offsets;
  for (const auto& h : p.halfspaces()) {
    normals.push_back(to_double(h.normal));
    offsets.push_back(to_double(h.offset));
  }
  auto inside = [&](const Vec& y) {
    for (std::size_t k = 0; k < normals.size(); ++k)
      if (dot(normals[k], y) > offsets[k]) return false;
    return true;
  };

  constexpr std::uint64_t chunk = 1 << 16;
  const std::uint64_t n = cfg.samples;
  const std::size_t chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  struct Partial {
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t accepted = 0;
  };
  std::vector<Partial> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    KahanSum s, s2;
    Partial out;
    Vec y(d);
    const std::uint64_t begin = c * chunk, end = std::min(n, begin + chunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double u = uniform01(cfg.seed, i * d + j);
        y[j] = box[j].first + u * (box[j].second - box[j].first);
      }
      if (!inside(y)) continue;
      double v = integrand(y);
      s.add(v);
      s2.add(v * v);
      ++out.accepted;
    }
    out.sum = s.value();
    out.sum_sq = s2.value();
    parts[c] = out;
  });
  // acceptance over the first 1e4 draws lives in chunk 0
  if (parts.front().accepted == 0)
    throw Error(ErrorKind::BoxTooTight, "no sample accepted in the first draws");
  KahanSum s, s2;
  McResult r;
  for (const auto& pt : parts) {
    s.add(pt.sum);
    s2.add(pt.sum_sq);
    r.accepted += pt.accepted;
  }
  r.samples = n;
  const double nn = static_cast<double>(n);
  const double mean = s.value() / nn;
  const double var = std::max(0.0, s2.value() / nn - mean * mean);
  r.estimate = box_volume * mean;
  r.std_error = box_volume * std::sqrt(var / (nn - 1.0));
  return r;
}

struct GridMinResult {
  Vec lambda;
  Vec coords;  // fundamental-weight (then central) coordinates
  double h = 0.0;
  Vec spacing;
  Vec refined_lambda;
  Vec refined_coords;
  bool certified = false;
  std::size_t evaluations = 0;
};

namespace detail {

/// Columns: fundamental weights, then an orthonormal basis of the centre.
inline Mat<double> weight_frame(const RootSystem& rs) {
  Mat<double> frame = rs.fundamental_weights();
  if (rs.central_rank() > 0) {
    Mat<double> rows;
    for (const auto& a : rs.simple_roots()) rows.push_back(a.vec);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rs.dim()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rs.dim(); ++j) m(i, j) = rows[i][j];
    Eigen::MatrixXd v;
    if (rows.empty()) {
      v = Eigen::MatrixXd::Identity(rs.dim(), rs.dim());
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
      v = svd.matrixV().rightCols(static_cast<Eigen::Index>(rs.central_rank()));
    }
    for (Eigen::Index c = 0; c < v.cols(); ++c) frame.push_back(Vec(v.col(c).data(), v.col(c).data() + v.rows()));
  }
  return frame;
}

struct GridScan {
  Vec coords;
  double h = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

inline GridScan scan_grid(const HFunctional& hf, const Mat<double>& frame,
                          const std::vector<std::pair<double, double>>& box, const std::vector<int>& steps) {
  const RootSystem& rs = hf.root_system();
  const std::size_t d = box.size();
  std::size_t total = 1;
  for (int s : steps) total *= static_cast<std::size_t>(s);
  std::vector<double> values(total, std::numeric_limits<double>::infinity());
  auto coords_of = [&](std::size_t idx) {
    Vec t(d);
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t k = idx % steps[i];
      idx /= steps[i];
      t[i] = steps[i] == 1 ? box[i].first
                           : box[i].first + (box[i].second - box[i].first) * static_cast<double>(k) / (steps[i] - 1);
    }
    return t;
  };
  auto lam_of = [&](const Vec& t) {
    Vec lam(rs.dim(), 0.0);
    for (std::size_t i = 0; i < d; ++i) lam = lam + scaled(frame[i], t[i]);
    return lam;
  };
  parallel_for(total, [&](std::size_t idx) {
    Vec lam = lam_of(coords_of(idx));
    if (!rs.is_dominant(lam, 1e-12)) return;
    values[idx] = hf.h_raw(lam);
  });
  GridScan out;
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (std::isfinite(values[idx])) ++out.evaluations;
    if (values[idx] < out.h) {
      out.h = values[idx];
      out.coords = coords_of(idx);
    }
  }
  return out;
}

}  // namespace detail

/// Exhaustive grid search of h over a box in fundamental-weight coordinates,
/// with a local twice-finer rescan around the argmin as certificate.
inline GridMinResult grid_minimize(const HFunctional& hf, const std::vector<std::pair<double, double>>& box,
                                   int steps) {
  const RootSystem& rs = hf.root_system();
  if (box.size() != rs.dim()) throw Error(ErrorKind::InvalidArgument, "box dimension mismatch");
  if (steps < 2) throw Error(ErrorKind::InvalidArgument, "steps must be >= 2");
  const Mat<double> frame = detail::weight_frame(rs);
  const std::size_t d = box.size();
  std::vector<int> st(d, steps);
  GridMinResult out;
  for (std::size_t i = 0; i < d; ++i) {
    if (box[i].second < box[i].first) throw Error(ErrorKind::InvalidArgument, "empty box interval");
    if (box[i].second == box[i].first) st[i] = 1;
    out.spacing.push_back((box[i].second - box[i].first) / (steps - 1));
  }
  auto coarse = detail::scan_grid(hf, frame, box, st);
  if (coarse.coords.empty()) throw Error(ErrorKind::InvalidArgument, "box has no dominant grid point");
  out.coords = coarse.coords;
  out.h = coarse.h;
  out.evaluations = coarse.evaluations;

  std::vector<std::pair<double, double>> fine_box;
  std::vector<int> fine_steps;
  for (std::size_t i = 0; i < d; ++i) {
    double lo = std::max(box[i].first, out.coords[i] - 2 * out.spacing[i]);
    double hi = std::min(box[i].second, out.coords[i] + 2 * out.spacing[i]);
    fine_box.push_back({lo, hi});
    fine_steps.push_back(st[i] == 1 ? 1 : static_cast<int>(std::lround((hi - lo) / (out.spacing[i] / 2))) + 1);
  }
  auto fine = detail::scan_grid(hf, frame, fine_box, fine_steps);
  out.evaluations += fine.evaluations;
  out.refined_coords = fine.coords;
  out.certified = true;
  for (std::size_t i = 0; i < d; ++i)
    if (std::abs(fine.coords[i] - out.coords[i]) >= out.spacing[i] && out.spacing[i] > 0) out.certified = false;

  auto lam_of = [&](const Vec& t) {
    Vec lam(rs.dim(), 0.0);
    for (std::size_t i = 0; i < d; ++i) lam = lam + scaled(frame[i], t[i]);
    return lam;
  };
  out.lambda = lam_of(out.coords);
  out.refined_lambda = lam_of(out.refined_coords);
  return out;
}

}  // namespace gcdeg
