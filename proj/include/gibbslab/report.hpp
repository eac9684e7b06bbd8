#pragma once

// JSON helpers shared by the module reports and the command-line tool.

#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

#include "gibbslab/reduced_dm.hpp"

namespace gibbslab {

std::string_view version();

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

/// {k, provenance, basis: [occupations], re: [[...]], im: [[...]]}.
nlohmann::json dm_to_json(const ReducedDM& dm);

/// Basis-labelled rows: row,col,mu,nu,re,im with occupations joined by '|'.
void write_dm_csv(std::ostream& os, const ReducedDM& dm);

/// Pretty-printed, key-sorted, trailing newline. Numbers round-trip exactly.
void write_json(std::ostream& os, const nlohmann::json& doc);

}  // namespace gibbslab
