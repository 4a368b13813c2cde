#pragma once

#include <string_view>

#include "popgame/compare.hpp"
#include "popgame/dynamics.hpp"
#include "popgame/environment.hpp"
#include "popgame/equilibria.hpp"
#include "popgame/errors.hpp"
#include "popgame/game.hpp"
#include "popgame/rng.hpp"
#include "popgame/trajectory.hpp"

namespace popgame {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace popgame
