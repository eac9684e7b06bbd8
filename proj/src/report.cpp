#include "gibbslab/report.hpp"

#include <ostream>
#include <string>

namespace gibbslab {

std::string_view version() { return GIBBSLAB_VERSION; }

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

namespace {

std::string label(const Occupation& nu) {
  std::string out;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(nu[i]);
  }
  return out;
}

}  // namespace

nlohmann::json dm_to_json(const ReducedDM& dm) {
  nlohmann::json out;
  out["k"] = dm.k;
  out["provenance"] = std::string(to_string(dm.provenance));
  nlohmann::json basis = nlohmann::json::array();
  for (const Occupation& nu : dm.basis.states()) basis.push_back(nu);
  out["basis"] = std::move(basis);
  out["re"] = matrix_to_json(dm.matrix.real());
  out["im"] = matrix_to_json(dm.matrix.imag());
  return out;
}

void write_dm_csv(std::ostream& os, const ReducedDM& dm) {
  os.precision(17);
  os << "row,col,mu,nu,re,im\n";
  for (std::size_t a = 0; a < dm.dimension(); ++a) {
    for (std::size_t b = 0; b < dm.dimension(); ++b) {
      const auto v = dm.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      os << a << ',' << b << ',' << label(dm.basis.state(a)) << ',' << label(dm.basis.state(b)) << ','
         << v.real() << ',' << v.imag() << '\n';
    }
  }
}

void write_json(std::ostream& os, const nlohmann::json& doc) { os << doc.dump(2) << '\n'; }

}  // namespace gibbslab
