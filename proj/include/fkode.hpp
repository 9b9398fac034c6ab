#pragma once

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/expression.hpp"
#include "fkode/coefficient.hpp"
#include "fkode/problem.hpp"
#include "fkode/matrix_exp.hpp"
#include "fkode/sampled_path.hpp"
#include "fkode/transform.hpp"
#include "fkode/riccati.hpp"
#include "fkode/quadrature.hpp"
#include "fkode/variational.hpp"
#include "fkode/tridiagonal.hpp"
#include "fkode/pathspace.hpp"
#include "fkode/reference.hpp"
#include "fkode/pipeline.hpp"
