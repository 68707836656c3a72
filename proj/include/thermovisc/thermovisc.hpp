#pragma once

#include "errors.hpp"
#include "tensor.hpp"
#include "material.hpp"
#include "constitutive.hpp"
#include "certification.hpp"
#include "report.hpp"
#include "grid.hpp"
#include "sim_config.hpp"
#include "heat.hpp"
#include "lbfgs.hpp"
#include "nonlinear_sim.hpp"
#include "linear_sim.hpp"
#include "diagnostics.hpp"
#include "config.hpp"
#include "commands.hpp"
