#pragma once

#include "drate/data_io.hpp"
#include "drate/dataset.hpp"
#include "drate/design.hpp"
#include "drate/errors.hpp"
#include "drate/estimators.hpp"
#include "drate/least_squares.hpp"
#include "drate/monte_carlo.hpp"
#include "drate/reports.hpp"
#include "drate/rng.hpp"
#include "drate/significance.hpp"
#include "drate/synthetic.hpp"
#include "drate/variance_theory.hpp"
