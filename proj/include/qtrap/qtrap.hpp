#pragma once

#include "qtrap/classical_baselines.hpp"
#include "qtrap/errors.hpp"
#include "qtrap/exponent_estimation.hpp"
#include "qtrap/fermion_entropy.hpp"
#include "qtrap/linalg.hpp"
#include "qtrap/matrix_oracle.hpp"
#include "qtrap/spectral_measure.hpp"
#include "qtrap/summation.hpp"
#include "qtrap/trap_dynamics.hpp"
