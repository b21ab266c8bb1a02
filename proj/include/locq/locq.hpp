// Umbrella header.

#pragma once

#include "locq/clifford.hpp"
#include "locq/ensemble.hpp"
#include "locq/errors.hpp"
#include "locq/estimator.hpp"
#include "locq/freeset.hpp"
#include "locq/geometry.hpp"
#include "locq/hamiltonians.hpp"
#include "locq/models.hpp"
#include "locq/protocol.hpp"
#include "locq/qstate.hpp"
#include "locq/rng.hpp"
#include "locq/runner.hpp"
#include "locq/scans.hpp"
#include "locq/serialize.hpp"
#include "locq/spectral.hpp"
#include "locq/states.hpp"
#include "locq/verify.hpp"
#include "locq/version.hpp"
