#pragma once

// Persistence of posterior draws: a magic line, a one-line JSON header
// (configuration, fingerprint, shapes, array table) and raw little-endian arrays.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "msdsp/config_io.hpp"
#include "msdsp/model.hpp"

namespace msdsp {

inline constexpr const char* kDrawsMagic = "MSDSP-DRAWS 1";

namespace detail {

static_assert(std::endian::native == std::endian::little, "draw files assume a little-endian host");

template <class T>
void write_array(std::ostream& out, const std::vector<T>& v) {
  if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void read_array(std::istream& in, std::vector<T>& v, std::size_t n, const std::string& name) {
  v.resize(n);
  if (n) in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  require(static_cast<std::size_t>(in.gcount()) == n * sizeof(T) || n == 0, ErrorCode::ParseError,
          "truncated array '" + name + "'");
}

// Visits every stored array with its name and element type tag.
template <class Draws, class F>
void for_each_array(Draws& d, F&& f) {
  f("beta_tilde", "f64", d.beta_tilde);
  f("s", "u8", d.s);
  f("H", "f64", d.H);
  f("g", "f64", d.g);
  f("beta0", "f64", d.beta0);
  f("mu_g", "f64", d.mu_g);
  f("phi_g", "f64", d.phi_g);
  f("sigma2_g", "f64", d.sigma2_g);
  f("stay0", "f64", d.stay0);
  f("stay1", "f64", d.stay1);
  f("mu", "f64", d.mu);
  f("phi", "f64", d.phi);
  f("state_var", "f64", d.state_var);
  f("xi", "f64", d.xi);
  f("xi_mu", "f64", d.xi_mu);
  f("r", "i32", d.r);
}

}  // namespace detail

inline void save_draws(std::ostream& out, const PosteriorDraws& d) {
  Json arrays = Json::array();
  detail::for_each_array(d, [&](const char* name, const char* type, const auto& v) {
    arrays.push_back(Json{{"name", name}, {"type", type}, {"length", v.size()}});
  });
  Json header{{"config", to_json(d.config)}, {"fingerprint", d.fingerprint}, {"rows", d.rows},
              {"coefs", d.coefs},            {"horizon", d.horizon},         {"count", d.count},
              {"arrays", arrays}};
  out << kDrawsMagic << '\n' << header.dump() << '\n';
  detail::for_each_array(d, [&](const char*, const char*, const auto& v) { detail::write_array(out, v); });
  require(out.good(), ErrorCode::IoError, "failed writing draws");
}

inline PosteriorDraws load_draws(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kDrawsMagic, ErrorCode::ParseError,
          "not a draws file (bad magic line)");
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, "missing draws header");
  Json header;
  try {
    header = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad draws header: ") + e.what());
  }
  PosteriorDraws d;
  try {
    d.config = config_from_json(header.at("config"));
    d.fingerprint = header.at("fingerprint").get<std::string>();
    d.rows = header.at("rows").get<Index>();
    d.coefs = header.at("coefs").get<Index>();
    d.horizon = header.at("horizon").get<int>();
    d.count = header.at("count").get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad draws header: ") + e.what());
  }
  const auto& arrays = header.at("arrays");
  std::size_t k = 0;
  detail::for_each_array(d, [&](const char* name, const char* type, auto& v) {
    require(k < arrays.size() && arrays[k].at("name") == name && arrays[k].at("type") == type, ErrorCode::ParseError,
            std::string("unexpected array table entry for '") + name + "'");
    detail::read_array(in, v, arrays[k].at("length").get<std::size_t>(), name);
    ++k;
  });
  const auto block = static_cast<std::size_t>(d.count * d.rows * d.coefs);
  require(d.beta_tilde.size() == block && d.s.size() == block && d.g.size() == static_cast<std::size_t>(d.count * d.rows),
          ErrorCode::ParseError, "array lengths disagree with the header shapes");
  return d;
}

inline void save_draws(const std::string& path, const PosteriorDraws& d) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot write " + path);
  save_draws(out, d);
}

inline PosteriorDraws load_draws(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  return load_draws(in);
}

// ---------------------------------------------------------------------------
// CSV helpers

/// Shortest decimal form that round-trips the double.
inline std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  require(header.empty() || static_cast<Index>(header.size()) == m.cols(), ErrorCode::LengthMismatch,
          "header width differs from the matrix");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (Index t = 0; t < m.rows(); ++t) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(t, j));
    out << '\n';
  }
}

/// Reads a numeric CSV with one header line.
inline std::pair<std::vector<std::string>, Eigen::MatrixXd> read_matrix_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, "empty csv");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      header.push_back(cell);
    }
  }
  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < cell.size() && (cell[used] == '\r' || cell[used] == ' ')) ++used;
      require(used == cell.size() && !cell.empty(), ErrorCode::ParseError,
              "non-numeric cell '" + cell + "' on data row " + std::to_string(rows + 1));
      values.push_back(v);
      ++cols;
    }
    require(cols == header.size(), ErrorCode::ParseError, "row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  Eigen::MatrixXd m(rows, static_cast<Index>(header.size()));
  for (Index t = 0; t < rows; ++t)
    for (Index j = 0; j < m.cols(); ++j) m(t, j) = values[static_cast<std::size_t>(t * m.cols() + j)];
  return {header, m};
}

inline std::pair<std::vector<std::string>, Eigen::MatrixXd> read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  return read_matrix_csv(in);
}

}  // namespace msdsp
