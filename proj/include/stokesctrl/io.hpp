#pragma once
// Convergence-table serialization: versioned CSV (one file per table family)
// and aligned plain-text tables.

#include <ostream>
#include <string>
#include <vector>

#include "stokesctrl/manufactured.hpp"

namespace stokesctrl {

// CSV columns: h,H,spacing,<error>,<order>[,...]; first line '#schema=1';
// 6 significant digits
void write_state_table(const std::vector<ErrorRow>& rows, const std::string& path);
void write_adjoint_table(const std::vector<ErrorRow>& rows, const std::string& path);
void write_control_table(const std::vector<ErrorRow>& rows, const std::string& path);

void print_error_tables(std::ostream& out, const std::string& title,
                        const std::vector<ErrorRow>& rows);

}  // namespace stokesctrl
