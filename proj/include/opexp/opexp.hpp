#pragma once

// Umbrella header for the whole library.

#include "opexp/chrono_exp.hpp"
#include "opexp/derivation.hpp"
#include "opexp/dump.hpp"
#include "opexp/expr.hpp"
#include "opexp/matrix_poly.hpp"
#include "opexp/parser.hpp"
#include "opexp/printer.hpp"
#include "opexp/problem.hpp"
#include "opexp/rational.hpp"
#include "opexp/series_engine.hpp"
#include "opexp/substitution.hpp"
#include "opexp/taylor.hpp"
#include "opexp/validate.hpp"
