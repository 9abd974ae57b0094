#pragma once

#include <filesystem>
#include <iosfwd>

#include "games/lp.hpp"

namespace games {

/// Fixed-format MPS. Names longer than eight characters and long numbers
/// push later fields right; the reader splits on whitespace so both forms
/// parse. Columns are written in index order, entries in row order.
void write_mps(const SparseLp& lp, std::ostream& out);
void write_mps(const SparseLp& lp, const std::filesystem::path& path);

/// Throws InputError with the offending line number on malformed input.
SparseLp read_mps(std::istream& in);
SparseLp read_mps(const std::filesystem::path& path);

}  // namespace games
