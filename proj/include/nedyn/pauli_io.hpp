#pragma once

// Text format for Pauli sums:
//
//   qubits <n>
//   <letters> <re> <im>
//   ...
//
// <letters> is an n-character string over {I,X,Y,Z}, most-significant qubit
// first. '#' starts a comment. Duplicate strings are summed on load.

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nedyn/pauli.hpp"

namespace nedyn {

namespace detail {

inline std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

inline bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

inline PauliSum read_pauli_sum(std::istream& in, const std::string& source = "<pauli>") {
  std::string line;
  int lineno = 0;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<PauliTerm> terms;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::strip_comment(line);
    if (detail::is_blank(body)) continue;
    std::istringstream ls(body);
    if (!have_header) {
      std::string key;
      long long count = -1;
      ls >> key >> count;
      std::string extra;
      if (key != "qubits" || ls.fail() || count < 0 || count > 64 || (ls >> extra)) {
        throw ParseError(source, lineno, "expected 'qubits <n>' header");
      }
      n = static_cast<std::size_t>(count);
      have_header = true;
      continue;
    }
    std::string letters;
    double re = 0.0;
    double im = 0.0;
    ls >> letters >> re >> im;
    std::string extra;
    if (ls.fail() || (ls >> extra)) throw ParseError(source, lineno, "expected '<letters> <re> <im>'");
    if (letters.size() != n) {
      throw ParseError(source, lineno,
                       "Pauli string has " + std::to_string(letters.size()) + " letters, expected " +
                           std::to_string(n));
    }
    try {
      terms.emplace_back(n, PauliString::parse(letters), cplx(re, im));
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (!have_header) throw ParseError(source, lineno, "missing 'qubits <n>' header");
  return PauliSum(n, terms);
}

inline PauliSum load_pauli_sum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_pauli_sum(in, path);
}

inline void write_pauli_sum(std::ostream& out, const PauliSum& sum) {
  out << "qubits " << sum.num_qubits() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& t : sum) {
    out << t.to_string() << ' ' << t.coefficient().real() << ' ' << t.coefficient().imag() << '\n';
  }
}

inline void save_pauli_sum(const std::string& path, const PauliSum& sum) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_pauli_sum(out, sum);
}

}  // namespace nedyn
