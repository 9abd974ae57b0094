#include "games/mps.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "games/errors.hpp"
#include "games/format.hpp"

namespace games {

namespace {

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// fields start at columns 2, 5, 15, 25, 40, 50 (1-based)
std::string data_line(const std::string& code, const std::string& f1, const std::string& f2,
                      const std::string& f3) {
  std::string line = " " + pad(code, 2) + " " + pad(f1, 8) + "  " + pad(f2, 8) + "  " + f3;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

void check_name(const std::string& name, const char* what) {
  if (name.empty()) throw InputError(std::string("empty ") + what + " name");
  for (char c : name) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw InputError(std::string(what) + " name contains whitespace: " + name);
    }
  }
}

}  // namespace

void write_mps(const SparseLp& lp, std::ostream& out) {
  lp.validate();
  check_name(lp.name, "problem");
  check_name(lp.objective_name, "objective");
  std::unordered_set<std::string> seen{lp.objective_name};
  for (const auto& r : lp.row_names) {
    check_name(r, "row");
    if (!seen.insert(r).second) throw InputError("duplicate row name " + r);
  }
  std::unordered_set<std::string> cols;
  for (const auto& c : lp.col_names) {
    check_name(c, "column");
    if (!cols.insert(c).second) throw InputError("duplicate column name " + c);
  }

  std::vector<std::vector<std::pair<int, double>>> by_col(lp.num_cols());
  for (const auto& e : lp.entries) by_col[e.col].emplace_back(e.row, e.value);
  for (auto& c : by_col) std::sort(c.begin(), c.end());

  out << "NAME          " << lp.name << '\n';
  out << "ROWS\n";
  out << data_line("N", lp.objective_name, "", "") << '\n';
  for (int i = 0; i < lp.num_rows(); ++i) {
    out << data_line(std::string(1, static_cast<char>(lp.sense[i])), lp.row_names[i], "", "") << '\n';
  }
  out << "COLUMNS\n";
  bool in_int = false;
  auto set_marker = [&](bool want) {
    if (want == in_int) return;
    out << "    " << pad("MARKER", 8) << "  'MARKER'                 "
        << (want ? "'INTORG'" : "'INTEND'") << '\n';
    in_int = want;
  };
  for (int j = 0; j < lp.num_cols(); ++j) {
    set_marker(lp.integer[j] != 0);
    const auto& name = lp.col_names[j];
    // a column needs at least one line to exist in the file
    if (lp.cost[j] != 0.0 || by_col[j].empty()) {
      out << data_line("", name, lp.objective_name, format_double(lp.cost[j])) << '\n';
    }
    for (const auto& [row, value] : by_col[j]) {
      out << data_line("", name, lp.row_names[row], format_double(value)) << '\n';
    }
  }
  set_marker(false);
  out << "RHS\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    if (lp.rhs[i] != 0.0) out << data_line("", "RHS", lp.row_names[i], format_double(lp.rhs[i])) << '\n';
  }
  out << "BOUNDS\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    const auto& name = lp.col_names[j];
    if (lo == -kInf && hi == kInf) {
      out << data_line("FR", "BND", name, "") << '\n';
    } else if (lo == hi) {
      out << data_line("FX", "BND", name, format_double(lo)) << '\n';
    } else {
      if (lo == -kInf) out << data_line("MI", "BND", name, "") << '\n';
      else if (lo != 0.0) out << data_line("LO", "BND", name, format_double(lo)) << '\n';
      if (hi != kInf) out << data_line("UP", "BND", name, format_double(hi)) << '\n';
    }
  }
  out << "ENDATA\n";
}

void write_mps(const SparseLp& lp, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  write_mps(lp, f);
  if (!f) throw InputError("cannot write " + path.string());
}

namespace {

class MpsParser {
 public:
  SparseLp run(std::istream& in) {
    enum class Section { None, Rows, Columns, Rhs, Ranges, Bounds, End };
    Section section = Section::None;
    std::string line;
    while (std::getline(in, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '*') continue;
      auto tok = split(line);
      if (tok.empty()) continue;
      if (line[0] != ' ' && line[0] != '\t') {
        const std::string& head = tok[0];
        if (head == "NAME") {
          lp_.name = tok.size() > 1 ? tok[1] : "";
          section = Section::None;
        } else if (head == "ROWS") {
          section = Section::Rows;
        } else if (head == "COLUMNS") {
          section = Section::Columns;
        } else if (head == "RHS") {
          section = Section::Rhs;
        } else if (head == "RANGES") {
          section = Section::Ranges;
        } else if (head == "BOUNDS") {
          section = Section::Bounds;
        } else if (head == "ENDATA") {
          section = Section::End;
          break;
        } else {
          fail("unknown section " + head);
        }
        continue;
      }
      switch (section) {
        case Section::Rows: row_line(tok); break;
        case Section::Columns: column_line(tok); break;
        case Section::Rhs: rhs_line(tok); break;
        case Section::Ranges: fail("RANGES entries are not supported");
        case Section::Bounds: bound_line(tok); break;
        default: fail("data line outside a section");
      }
    }
    if (section != Section::End) fail("missing ENDATA");
    if (objective_.empty()) fail("no objective row");
    lp_.validate();
    return std::move(lp_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("mps line " + std::to_string(line_no_) + ": " + msg);
  }

  static std::vector<std::string> split(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
  }

  double number(const std::string& s) const {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) fail("bad number '" + s + "'");
    return v;
  }

  void row_line(const std::vector<std::string>& tok) {
    if (tok.size() != 2) fail("ROWS line needs a type and a name");
    const std::string& type = tok[0];
    const std::string& name = tok[1];
    if (type == "N") {
      if (objective_.empty()) {
        objective_ = name;
        lp_.objective_name = name;
      } else {
        free_rows_.insert(name);
      }
      return;
    }
    RowSense s;
    if (type == "L") s = RowSense::LessEqual;
    else if (type == "G") s = RowSense::GreaterEqual;
    else if (type == "E") s = RowSense::Equal;
    else fail("unknown row type " + type);
    if (rows_.count(name) || name == objective_) fail("duplicate row " + name);
    rows_[name] = lp_.add_row(name, s, 0.0);
  }

  void column_line(const std::vector<std::string>& tok) {
    if (tok.size() >= 3 && tok[1] == "'MARKER'") {
      if (tok[2] == "'INTORG'") integer_ = true;
      else if (tok[2] == "'INTEND'") integer_ = false;
      else fail("unknown marker " + tok[2]);
      return;
    }
    if (tok.size() != 3 && tok.size() != 5) fail("COLUMNS line needs 3 or 5 fields");
    const std::string& name = tok[0];
    int col;
    auto it = cols_.find(name);
    if (it == cols_.end()) {
      col = lp_.add_column(name, 0.0, 0.0, kInf, integer_);
      cols_[name] = col;
    } else {
      if (name != last_col_) fail("column " + name + " is not contiguous");
      col = it->second;
    }
    last_col_ = name;
    for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
      const double v = number(tok[k + 1]);
      if (tok[k] == objective_) {
        lp_.cost[col] = v;
      } else if (free_rows_.count(tok[k])) {
        continue;
      } else {
        auto r = rows_.find(tok[k]);
        if (r == rows_.end()) fail("unknown row " + tok[k]);
        lp_.add_entry(r->second, col, v);
      }
    }
  }

  void rhs_line(const std::vector<std::string>& tok) {
    // optional set name
    const std::size_t start = tok.size() % 2 == 1 ? 1 : 0;
    if (tok.size() < 2 || tok.size() > 5) fail("bad RHS line");
    for (std::size_t k = start; k + 1 < tok.size(); k += 2) {
      const double v = number(tok[k + 1]);
      if (tok[k] == objective_ || free_rows_.count(tok[k])) continue;
      auto r = rows_.find(tok[k]);
      if (r == rows_.end()) fail("unknown row " + tok[k]);
      lp_.rhs[r->second] = v;
    }
  }

  void bound_line(const std::vector<std::string>& tok) {
    const std::string& type = tok[0];
    const bool valueless = type == "FR" || type == "MI" || type == "PL" || type == "BV";
    std::string col_name;
    std::string value;
    if (valueless) {
      if (tok.size() == 3) col_name = tok[2];
      else if (tok.size() == 2) col_name = tok[1];
      else if (type == "BV" && tok.size() == 4) col_name = tok[2];
      else fail("bad " + type + " bound line");
    } else {
      if (tok.size() == 4) col_name = tok[2], value = tok[3];
      else if (tok.size() == 3) col_name = tok[1], value = tok[2];
      else fail("bad " + type + " bound line");
    }
    auto it = cols_.find(col_name);
    if (it == cols_.end()) fail("unknown column " + col_name);
    const int j = it->second;
    if (type == "UP") {
      lp_.upper[j] = number(value);
    } else if (type == "LO") {
      lp_.lower[j] = number(value);
    } else if (type == "FX") {
      lp_.lower[j] = lp_.upper[j] = number(value);
    } else if (type == "FR") {
      lp_.lower[j] = -kInf;
      lp_.upper[j] = kInf;
    } else if (type == "MI") {
      lp_.lower[j] = -kInf;
    } else if (type == "PL") {
      lp_.upper[j] = kInf;
    } else if (type == "BV") {
      lp_.lower[j] = 0.0;
      lp_.upper[j] = 1.0;
      lp_.integer[j] = 1;
    } else if (type == "LI" || type == "UI") {
      (type == "LI" ? lp_.lower[j] : lp_.upper[j]) = number(value);
      lp_.integer[j] = 1;
    } else {
      fail("unknown bound type " + type);
    }
  }

  SparseLp lp_;
  int line_no_ = 0;
  std::string objective_;
  std::unordered_set<std::string> free_rows_;
  std::unordered_map<std::string, int> rows_;
  std::unordered_map<std::string, int> cols_;
  std::string last_col_;
  bool integer_ = false;
};

}  // namespace

SparseLp read_mps(std::istream& in) {
  MpsParser p;
  return p.run(in);
}

SparseLp read_mps(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  return read_mps(f);
}

}  // namespace games
