#pragma once

#include "tlstark/alpha_fit.hpp"
#include "tlstark/budget.hpp"
#include "tlstark/campaign.hpp"
#include "tlstark/constants.hpp"
#include "tlstark/core_model.hpp"
#include "tlstark/deconvolution.hpp"
#include "tlstark/errors.hpp"
#include "tlstark/field_solver.hpp"
#include "tlstark/interpolation.hpp"
#include "tlstark/io.hpp"
#include "tlstark/phase_tracking.hpp"
#include "tlstark/quadrature.hpp"
#include "tlstark/rng.hpp"
#include "tlstark/scan_fit.hpp"
#include "tlstark/signal_model.hpp"
#include "tlstark/synth.hpp"
#include "tlstark/velocity.hpp"
#include "tlstark/visibility.hpp"
