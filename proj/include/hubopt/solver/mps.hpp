#pragma once

// Fixed-format MPS interchange. Rows and columns carry generated 8-character
// names (R0000001, C0000001); a sidecar `.tags` file maps them back to
// constraint tags and variable names.

#include "hubopt/milp/instance.hpp"
#include "hubopt/solver/lp.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hubopt::solver
{

/// Objective row name.
inline constexpr std::string_view kCostRow = "COST";

std::string mps_row_name(int i);
std::string mps_column_name(int j);

/// Throws Error{IoFailure}.
void write_mps(const milp::MILPInstance& instance, const std::filesystem::path& path);
void write_mps(const milp::MILPInstance& instance, std::ostream& out, std::string_view name = "HUBOPT");

struct MpsModel
{
    std::string name;
    std::vector<std::string> row_names;
    std::vector<std::string> column_names;
    LpProblem lp;
    std::vector<milp::Domain> domains;
};

/// Whitespace-tokenised reader for the files written above (and ordinary MPS
/// files). Throws Error{ParseError | IoFailure}.
MpsModel read_mps(const std::filesystem::path& path);
MpsModel parse_mps(std::istream& in);

/// Sidecar path for an MPS file: `out.mps` -> `out.tags`.
std::filesystem::path tags_path(const std::filesystem::path& mps);

/// Lines `C0000001 <variable name>` then `R0000001 <constraint tag>`.
void write_tags(const milp::MILPInstance& instance, const std::filesystem::path& path);

struct TagMap
{
    /// MPS column name -> variable name.
    std::map<std::string, std::string> columns;
    /// MPS row name -> constraint tag.
    std::map<std::string, std::string> rows;
};

TagMap read_tags(const std::filesystem::path& path);

} // namespace hubopt::solver
