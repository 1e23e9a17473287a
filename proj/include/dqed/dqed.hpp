#pragma once

#include "dqed/config.hpp"
#include "dqed/dynamics.hpp"
#include "dqed/entanglement.hpp"
#include "dqed/errors.hpp"
#include "dqed/hilbert.hpp"
#include "dqed/linalg.hpp"
#include "dqed/model.hpp"
#include "dqed/policy.hpp"
