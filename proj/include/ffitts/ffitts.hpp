#pragma once

#include "ffitts/datamodel.hpp"
#include "ffitts/errors.hpp"
#include "ffitts/fitting.hpp"
#include "ffitts/id_models.hpp"
#include "ffitts/ingestion.hpp"
#include "ffitts/random.hpp"
#include "ffitts/sigma_estimation.hpp"
#include "ffitts/simulator.hpp"
#include "ffitts/stats.hpp"
