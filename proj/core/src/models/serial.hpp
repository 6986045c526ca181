#pragma once

// Whitespace-token text format shared by the model save/load code.

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"
#include "asymcast/types.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace asymcast::serial {

inline std::string next_token(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw IngestionError("model bundle: unexpected end of data", 0);
  return token;
}

inline void expect(std::istream& in, const std::string& keyword) {
  const auto token = next_token(in);
  if (token != keyword) {
    throw IngestionError("model bundle: expected '" + keyword + "', found '" + token + "'", 0);
  }
}

inline double read_double(std::istream& in) {
  const auto token = next_token(in);
  const auto v = text::parse_double(token);
  if (!v) throw IngestionError("model bundle: bad number '" + token + "'", 0);
  return *v;
}

inline std::int64_t read_int(std::istream& in) {
  const auto token = next_token(in);
  const auto v = text::parse_int(token);
  if (!v) throw IngestionError("model bundle: bad integer '" + token + "'", 0);
  return *v;
}

inline std::size_t read_size(std::istream& in) {
  const auto v = read_int(in);
  if (v < 0) throw IngestionError("model bundle: negative size", 0);
  return static_cast<std::size_t>(v);
}

inline void write_vector(std::ostream& out, const Vector& v) {
  out << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << text::format_double(v[i]);
  out << '\n';
}

inline Vector read_vector(std::istream& in) {
  const auto n = read_size(in);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = read_double(in);
  return v;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << text::format_double(m(r, c));
    }
    out << '\n';
  }
}

inline Matrix read_matrix(std::istream& in) {
  const auto rows = read_size(in);
  const auto cols = read_size(in);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_double(in);
  }
  return m;
}

}  // namespace asymcast::serial
