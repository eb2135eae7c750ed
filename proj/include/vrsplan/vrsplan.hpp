#pragma once

// Convenience umbrella for the whole library.

#include "vrsplan/atlas.hpp"
#include "vrsplan/config.hpp"
#include "vrsplan/integrator.hpp"
#include "vrsplan/io.hpp"
#include "vrsplan/nlp.hpp"
#include "vrsplan/ocp.hpp"
#include "vrsplan/planner.hpp"
#include "vrsplan/pmp.hpp"
#include "vrsplan/rotor_aero.hpp"
#include "vrsplan/transcription.hpp"
#include "vrsplan/validate.hpp"
#include "vrsplan/vehicle_dynamics.hpp"
