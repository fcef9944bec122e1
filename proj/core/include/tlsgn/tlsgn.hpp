#pragma once

#include "tlsgn/dense_linalg.hpp"
#include "tlsgn/error.hpp"
#include "tlsgn/gn_solver.hpp"
#include "tlsgn/matrix_io.hpp"
#include "tlsgn/power_oracle.hpp"
#include "tlsgn/probgen.hpp"
#include "tlsgn/problem.hpp"
#include "tlsgn/svd_reference.hpp"
#include "tlsgn/variational.hpp"
