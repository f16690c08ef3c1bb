#pragma once

#include "gcdeg/error.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/polynomial.hpp"
#include "gcdeg/parallel.hpp"
#include "gcdeg/rootsys.hpp"
#include "gcdeg/polytope.hpp"
#include "gcdeg/expint.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/minimize.hpp"
#include "gcdeg/degeneration.hpp"
#include "gcdeg/testconfig.hpp"
#include "gcdeg/oracle.hpp"
#include "gcdeg/io.hpp"
#include "gcdeg/presets.hpp"
#include "gcdeg/analysis.hpp"
