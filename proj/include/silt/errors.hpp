#pragma once

#include <stdexcept>
#include <string>

namespace silt {

/// A numerical budget (evaluation count, truncation mass, box size) was
/// exhausted before the requested accuracy was reached.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace silt
