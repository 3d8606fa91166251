#pragma once

#include "qfb/delay_control.hpp"
#include "qfb/errors.hpp"
#include "qfb/experiment.hpp"
#include "qfb/jacobi.hpp"
#include "qfb/linalg.hpp"
#include "qfb/quantum_core.hpp"
#include "qfb/rng.hpp"
#include "qfb/sme_integrator.hpp"
#include "qfb/stability_lmi.hpp"
