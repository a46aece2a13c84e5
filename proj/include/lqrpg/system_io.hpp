#pragma once

#include <optional>
#include <string>

#include "lqrpg/lqr_core.hpp"
#include "lqrpg/toml_lite.hpp"

namespace lqrpg {

namespace detail {

inline Matrix matrix_from_value(const toml::Value& v, const std::string& name) {
  if (!v.is_array() || v.array().empty())
    throw InvalidArgumentError(name + " must be a non-empty array of rows");
  const auto& rows = v.array();
  const bool nested = rows[0].is_array();
  const Eigen::Index nrows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index ncols =
      nested ? static_cast<Eigen::Index>(rows[0].array().size()) : 1;
  Matrix m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    if (nested) {
      const auto& row = rows[i].array();
      if (static_cast<Eigen::Index>(row.size()) != ncols)
        throw InvalidArgumentError(name + " has ragged rows");
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (!row[j].is_number()) throw InvalidArgumentError(name + " entries must be numbers");
        m(i, j) = row[j].number();
      }
    } else {
      if (!rows[i].is_number()) throw InvalidArgumentError(name + " entries must be numbers");
      m(i, 0) = rows[i].number();
    }
  }
  return m;
}

inline const toml::Value& require(const toml::Table& t, const std::string& key,
                                  const std::string& table) {
  const auto it = t.find(key);
  if (it == t.end()) throw InvalidArgumentError("missing [" + table + "] key '" + key + "'");
  return it->second;
}

}  // namespace detail

struct SystemFile {
  LqrSystem system;
  std::optional<Controller> controller;
};

inline SystemFile load_system(const toml::Document& doc) {
  const auto sys_it = doc.find("system");
  if (sys_it == doc.end()) throw InvalidArgumentError("missing [system] table");
  const toml::Table& st = sys_it->second;

  SystemFile out;
  out.system.A = detail::matrix_from_value(detail::require(st, "A", "system"), "A");
  out.system.B = detail::matrix_from_value(detail::require(st, "B", "system"), "B");
  out.system.Q = detail::matrix_from_value(detail::require(st, "Q", "system"), "Q");
  out.system.R = detail::matrix_from_value(detail::require(st, "R", "system"), "R");

  const auto noise_it = doc.find("noise");
  if (noise_it == doc.end()) throw InvalidArgumentError("missing [noise] table");
  const toml::Table& nt = noise_it->second;
  const std::string kind =
      detail::require(nt, "kind", "noise").is_string()
          ? detail::require(nt, "kind", "noise").string()
          : throw InvalidArgumentError("[noise] kind must be a string");
  const Matrix cov =
      detail::matrix_from_value(detail::require(nt, "covariance", "noise"), "covariance");
  if (kind == "bounded_iid") {
    out.system.noise = NoiseModel::bounded_iid(cov);
  } else if (kind == "truncated_gaussian") {
    const toml::Value& radius = detail::require(nt, "truncation_radius", "noise");
    if (!radius.is_number())
      throw InvalidArgumentError("[noise] truncation_radius must be a number");
    out.system.noise = NoiseModel::truncated_gaussian(cov, radius.number());
  } else {
    throw InvalidArgumentError("unknown noise kind '" + kind +
                               "' (expected bounded_iid or truncated_gaussian)");
  }
  if (auto it = nt.find("sigma_sq"); it != nt.end() && it->second.is_number())
    out.system.noise.sigma_sq = it->second.number();
  if (auto it = nt.find("bound_W"); it != nt.end() && it->second.is_number())
    out.system.noise.bound_W = it->second.number();

  out.system.validate();

  if (auto ct = doc.find("controller"); ct != doc.end()) {
    Controller K;
    K.K = detail::matrix_from_value(detail::require(ct->second, "K", "controller"), "K");
    if (K.K.rows() != out.system.du() || K.K.cols() != out.system.dx())
      throw InvalidArgumentError("controller K must be d_u x d_x");
    out.controller = K;
  }
  return out;
}

inline SystemFile load_system_file(const std::string& path) {
  return load_system(toml::parse_file(path));
}

}  // namespace lqrpg
