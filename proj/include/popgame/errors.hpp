#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace popgame {

// An aggregate adoption level that no rational share in [0,1] can realize
// under the given population mix.
class InfeasibleStateError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Parameters sit within tolerance of a boundary between two rows of the
// closed-form stable-set classification. The rows disagree about boundary
// membership, so no row is selected; callers must perturb the inputs or
// evaluate both neighboring regimes themselves.
class RegimeAmbiguityError : public std::runtime_error {
  public:
    explicit RegimeAmbiguityError(std::string boundary)
        : std::runtime_error("parameters sit on a regime boundary: " + boundary),
          boundary_(std::move(boundary)) {}

    const std::string& boundary() const noexcept { return boundary_; }

  private:
    std::string boundary_;
};

// A long-run limit was requested but the trajectory had not settled by the
// integration cap.
class DivergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace popgame
