#pragma once

// Policy files: plain text with a dimension header followed by the dense
// feed-forward vector and gain matrices, row-major, 17 significant digits.
//
//   drds-policy 1
//   n <n>
//   m <m>
//   d <d>
//   N <N>
//   v <Nm>
//   <Nm values on one line>
//   L <Nm> <(N+1)n>
//   <Nm lines>                  (gain on the stacked disturbance response)
//   K <Nm> <(N+1)n>
//   <Nm lines>                  (equivalent state-feedback gain)
//
// Writing then loading reproduces the policy bit for bit.

#include <drds/io/text.hpp>
#include <drds/system.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace drds::io {

struct PolicyFile {
  sys::Policy policy;
  int n = 0, m = 0, d = 0, N = 0;
};

namespace detail {

inline void write_row(std::ostream& os, const Vec& row) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i) os << ' ';
    os << fmt17(row(i));
  }
  os << '\n';
}

inline std::string next_line(std::istream& in, const std::string& where) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(where + ": unexpected end of file");
  return rstrip(line);
}

inline Vec read_row(std::istream& in, Eigen::Index count, const std::string& where) {
  const auto toks = split_ws(next_line(in, where));
  if (static_cast<Eigen::Index>(toks.size()) != count)
    throw ParseError(where + ": expected " + std::to_string(count) + " values, got " +
                     std::to_string(toks.size()));
  Vec out(count);
  for (Eigen::Index i = 0; i < count; ++i)
    out(i) = parse_double(toks[static_cast<size_t>(i)], where);
  return out;
}

inline int read_dim(std::istream& in, const char* key) {
  const auto toks = split_ws(next_line(in, key));
  if (toks.size() != 2 || toks[0] != key)
    throw ParseError(std::string("policy header: expected \"") + key + " <value>\"");
  const long long v = parse_int(toks[1], key);
  if (v < 1) throw ParseError(std::string("policy header: ") + key + " must be positive");
  return static_cast<int>(v);
}

inline void read_mat_header(std::istream& in, const char* key, Eigen::Index rows,
                            Eigen::Index cols) {
  const auto toks = split_ws(next_line(in, key));
  if (toks.size() != 3 || toks[0] != key)
    throw ParseError(std::string("policy: expected \"") + key + " <rows> <cols>\"");
  if (parse_int(toks[1], key) != rows || parse_int(toks[2], key) != cols)
    throw ParseError(std::string("policy: ") + key + " dimensions disagree with the header");
}

}  // namespace detail

inline void write_policy(const PolicyFile& pf, std::ostream& os) {
  const sys::Policy& pol = pf.policy;
  os << "drds-policy 1\n";
  os << "n " << pf.n << "\nm " << pf.m << "\nd " << pf.d << "\nN " << pf.N << "\n";
  os << "v " << pol.v.size() << "\n";
  detail::write_row(os, pol.v);
  os << "L " << pol.L.rows() << " " << pol.L.cols() << "\n";
  for (Eigen::Index r = 0; r < pol.L.rows(); ++r)
    detail::write_row(os, pol.L.row(r).transpose());
  os << "K " << pol.K.rows() << " " << pol.K.cols() << "\n";
  for (Eigen::Index r = 0; r < pol.K.rows(); ++r)
    detail::write_row(os, pol.K.row(r).transpose());
}

inline void save_policy(const PolicyFile& pf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  write_policy(pf, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline PolicyFile read_policy(std::istream& in) {
  const std::string magic = detail::next_line(in, "policy");
  if (magic != "drds-policy 1")
    throw ParseError("policy: unrecognized header \"" + magic + "\" (expected \"drds-policy 1\")");
  PolicyFile pf;
  pf.n = detail::read_dim(in, "n");
  pf.m = detail::read_dim(in, "m");
  pf.d = detail::read_dim(in, "d");
  pf.N = detail::read_dim(in, "N");
  const Eigen::Index nm = static_cast<Eigen::Index>(pf.N) * pf.m;
  const Eigen::Index nx = static_cast<Eigen::Index>(pf.N + 1) * pf.n;

  {
    const auto toks = detail::split_ws(detail::next_line(in, "v"));
    if (toks.size() != 2 || toks[0] != "v" || parse_int(toks[1], "v") != nm)
      throw ParseError("policy: expected \"v " + std::to_string(nm) + "\"");
  }
  pf.policy.v = detail::read_row(in, nm, "policy v");

  detail::read_mat_header(in, "L", nm, nx);
  pf.policy.L.resize(nm, nx);
  for (Eigen::Index r = 0; r < nm; ++r)
    pf.policy.L.row(r) = detail::read_row(in, nx, "policy L").transpose();

  detail::read_mat_header(in, "K", nm, nx);
  pf.policy.K.resize(nm, nx);
  for (Eigen::Index r = 0; r < nm; ++r)
    pf.policy.K.row(r) = detail::read_row(in, nx, "policy K").transpose();
  return pf;
}

inline PolicyFile load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open policy file: " + path);
  return read_policy(in);
}

}  // namespace drds::io
