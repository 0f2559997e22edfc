#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <tuple>

#include "roa/sdp.hpp"

namespace roa::sdp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

struct Row {
  int mat, block, i, j;
  double v;
};

}  // namespace

std::string export_sdpa(const Problem& prob) {
  prob.validate();
  const int m = prob.num_constraints();
  const int nf = static_cast<int>(prob.free_vars.size());
  std::vector<int> dims = prob.block_dims;
  if (nf > 0) dims.push_back(-2 * nf);
  const int split_block = static_cast<int>(prob.block_dims.size()) + 1;

  std::vector<Row> rows;
  for (const auto& e : prob.objective) rows.push_back({0, e.block + 1, e.row + 1, e.col + 1, -e.value});
  for (int j = 0; j < m; ++j) {
    for (const auto& e : prob.constraints[static_cast<std::size_t>(j)]) {
      rows.push_back({j + 1, e.block + 1, e.row + 1, e.col + 1, e.value});
    }
  }
  for (int l = 0; l < nf; ++l) {
    const auto& fv = prob.free_vars[static_cast<std::size_t>(l)];
    const int plus = 2 * l + 1, minus = 2 * l + 2;
    rows.push_back({0, split_block, plus, plus, -fv.cost});
    rows.push_back({0, split_block, minus, minus, fv.cost});
    for (const auto& [j, v] : fv.coeffs) {
      rows.push_back({j + 1, split_block, plus, plus, v});
      rows.push_back({j + 1, split_block, minus, minus, -v});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.mat, a.block, a.i, a.j) < std::tie(b.mat, b.block, b.i, b.j);
  });
  // Merge duplicates so the file holds one line per matrix entry.
  std::vector<Row> merged;
  for (const auto& r : rows) {
    if (!merged.empty() && merged.back().mat == r.mat && merged.back().block == r.block && merged.back().i == r.i &&
        merged.back().j == r.j) {
      merged.back().v += r.v;
    } else {
      merged.push_back(r);
    }
  }

  std::ostringstream out;
  out << m << "\n" << dims.size() << "\n";
  for (std::size_t k = 0; k < dims.size(); ++k) out << (k ? " " : "") << dims[k];
  out << "\n";
  for (int j = 0; j < m; ++j) out << (j ? " " : "") << fmt(prob.rhs[static_cast<std::size_t>(j)]);
  out << "\n";
  for (const auto& r : merged) {
    if (r.v == 0.0) continue;
    out << r.mat << " " << r.block << " " << r.i << " " << r.j << " " << fmt(r.v) << "\n";
  }
  return out.str();
}

SdpaParseError::SdpaParseError(const std::string& what, int line)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

// Header lines may carry punctuation such as "{2, -3}" and trailing text
// such as "=mDIM".
std::vector<std::string> header_tokens(std::string s) {
  auto eq = s.find('=');
  if (eq != std::string::npos) s.erase(eq);
  for (char& c : s) {
    if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
  }
  std::istringstream in(s);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

long parse_int(const std::string& s, int line) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw SdpaParseError("expected an integer, got '" + s + "'", line);
  }
  if (pos != s.size()) throw SdpaParseError("expected an integer, got '" + s + "'", line);
  return v;
}

double parse_double(const std::string& s, int line) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw SdpaParseError("expected a number, got '" + s + "'", line);
  }
  if (pos != s.size()) throw SdpaParseError("expected a number, got '" + s + "'", line);
  return v;
}

}  // namespace

Problem parse_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::pair<int, std::string>> lines;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '"' || line[first] == '*') continue;
    lines.emplace_back(lineno, line);
  }
  if (lines.size() < 4) throw SdpaParseError("truncated header", lineno);

  Problem p;
  auto t0 = header_tokens(lines[0].second);
  if (t0.empty()) throw SdpaParseError("missing constraint count", lines[0].first);
  const long m = parse_int(t0[0], lines[0].first);
  if (m <= 0) throw SdpaParseError("constraint count must be positive", lines[0].first);
  auto t1 = header_tokens(lines[1].second);
  if (t1.empty()) throw SdpaParseError("missing block count", lines[1].first);
  const long nb = parse_int(t1[0], lines[1].first);
  if (nb <= 0) throw SdpaParseError("block count must be positive", lines[1].first);
  auto t2 = header_tokens(lines[2].second);
  if (static_cast<long>(t2.size()) < nb) throw SdpaParseError("block structure too short", lines[2].first);
  for (long k = 0; k < nb; ++k) {
    long d = parse_int(t2[static_cast<std::size_t>(k)], lines[2].first);
    if (d == 0) throw SdpaParseError("zero block dimension", lines[2].first);
    p.block_dims.push_back(static_cast<int>(d));
  }
  // The cost vector may span several lines.
  std::size_t li = 3;
  std::vector<double> c;
  while (static_cast<long>(c.size()) < m) {
    if (li >= lines.size()) throw SdpaParseError("cost vector too short", lineno);
    for (const auto& t : header_tokens(lines[li].second)) c.push_back(parse_double(t, lines[li].first));
    ++li;
  }
  if (static_cast<long>(c.size()) != m) throw SdpaParseError("cost vector has too many entries", lines[li - 1].first);
  for (double v : c) p.add_constraint(v);

  for (; li < lines.size(); ++li) {
    const int ln = lines[li].first;
    std::istringstream ls(lines[li].second);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.size() != 5) throw SdpaParseError("entry line needs 5 fields", ln);
    const long mat = parse_int(toks[0], ln), blk = parse_int(toks[1], ln);
    long i = parse_int(toks[2], ln), j = parse_int(toks[3], ln);
    const double v = parse_double(toks[4], ln);
    if (mat < 0 || mat > m) throw SdpaParseError("matrix index out of range", ln);
    if (blk < 1 || blk > nb) throw SdpaParseError("block index out of range", ln);
    const int dim = std::abs(p.block_dims[static_cast<std::size_t>(blk - 1)]);
    if (i < 1 || j < 1 || i > dim || j > dim) throw SdpaParseError("entry index out of range", ln);
    if (i > j) std::swap(i, j);
    if (p.block_dims[static_cast<std::size_t>(blk - 1)] < 0 && i != j) {
      throw SdpaParseError("off-diagonal entry in a diagonal block", ln);
    }
    Entry e{static_cast<int>(blk - 1), static_cast<int>(i - 1), static_cast<int>(j - 1), v};
    if (mat == 0) {
      e.value = -v;
      p.objective.push_back(e);
    } else {
      p.constraints[static_cast<std::size_t>(mat - 1)].push_back(e);
    }
  }
  p.canonicalize();
  return p;
}

}  // namespace roa::sdp
