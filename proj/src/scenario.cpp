#include "pmm/scenario.hpp"

#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace pmm {

using std::numbers::pi;

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

std::string to_string(Output o) {
  switch (o) {
    case Output::ports_csv: return "ports-csv";
    case Output::image: return "image";
    case Output::fidelity: return "fidelity";
    case Output::gate_check: return "gate-check";
    case Output::sweep: return "sweep";
    case Output::montecarlo: return "montecarlo";
    case Output::compensation: return "compensation";
  }
  return "unknown";
}

namespace {

// Error inside a value, positioned relative to the start of that value.
struct ValueError {
  std::size_t offset;
  std::string message;
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, std::size_t offset = 0) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ValueError{offset, "expected a number, got '" + std::string(s) + "'"};
  }
  return v;
}

long long parse_integer(std::string_view s, std::size_t offset = 0) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ValueError{offset, "expected an integer, got '" + std::string(s) + "'"};
  }
  return v;
}

// Splits on a separator and reports each piece with its offset.
std::vector<std::pair<std::string_view, std::size_t>> split(std::string_view s, char sep) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      std::string_view piece = s.substr(start, i - start);
      std::size_t lead = 0;
      while (lead < piece.size() && is_space(piece[lead])) ++lead;
      out.emplace_back(trim(piece), start + lead);
      start = i + 1;
    }
  }
  return out;
}

double angle_at(std::string_view text, std::size_t offset) {
  std::string_view s = trim(text);
  if (s.empty()) throw ValueError{offset, "empty angle"};
  if (s.size() > 3 && s.substr(s.size() - 3) == "deg") {
    return parse_number(s.substr(0, s.size() - 3), offset) * pi / 180.0;
  }
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string_view::npos) return parse_number(s, offset);

  std::string_view coef = trim(s.substr(0, pi_pos));
  double c = 1.0;
  if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
  if (coef == "-") {
    c = -1.0;
  } else if (!coef.empty() && coef != "+") {
    c = parse_number(coef, offset);
  }
  std::string_view rest = trim(s.substr(pi_pos + 2));
  double denom = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw ValueError{offset + pi_pos + 2, "expected '/' after pi"};
    denom = parse_number(rest.substr(1), offset + pi_pos + 3);
    if (denom == 0.0) throw ValueError{offset + pi_pos + 3, "division by zero"};
  }
  return c * pi / denom;
}

std::vector<int> int_list(std::string_view text, std::size_t offset) {
  std::vector<int> out;
  for (auto [piece, off] : split(text, ',')) {
    if (piece.empty()) throw ValueError{offset + off, "empty list item"};
    const auto dots = piece.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(static_cast<int>(parse_integer(piece, offset + off)));
      continue;
    }
    const auto lo = parse_integer(piece.substr(0, dots), offset + off);
    const auto hi = parse_integer(piece.substr(dots + 2), offset + off + dots + 2);
    if (hi < lo) throw ValueError{offset + off, "empty range"};
    for (auto v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
  }
  return out;
}

// `0deg..2deg step 0.2deg`, or a comma list of angles.
std::vector<double> angle_list(std::string_view text, std::size_t offset) {
  std::vector<double> out;
  for (auto [piece, off] : split(text, ',')) {
    const auto dots = piece.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(angle_at(piece, offset + off));
      continue;
    }
    const auto step_pos = piece.find("step");
    if (step_pos == std::string_view::npos) {
      throw ValueError{offset + off, "angle range needs 'step <angle>'"};
    }
    const double lo = angle_at(piece.substr(0, dots), offset + off);
    const double hi = angle_at(piece.substr(dots + 2, step_pos - dots - 2), offset + off + dots + 2);
    const double st = angle_at(piece.substr(step_pos + 4), offset + off + step_pos + 4);
    if (!(st > 0.0)) throw ValueError{offset + off + step_pos + 4, "step must be positive"};
    const long n = std::lround((hi - lo) / st);
    if (n < 0) throw ValueError{offset + off, "empty range"};
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * st);
  }
  return out;
}

// ---- ket expressions ------------------------------------------------------

constexpr int kNoPol = -1;
constexpr int kNoMode = INT_MIN;

using TermMap = std::map<std::pair<int, int>, cplx>;

class KetParser {
 public:
  explicit KetParser(std::string_view s) : s_(s) {}

  TermMap parse() {
    TermMap t = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ValueError{pos_, msg}; }

  void skip() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  bool at_end() {
    skip();
    return pos_ >= s_.size();
  }
  char peek() { return at_end() ? '\0' : s_[pos_]; }

  TermMap expr() {
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = s_[pos_] == '-' ? -1.0 : 1.0;
      ++pos_;
    }
    TermMap acc = scale(product(), sign);
    while (peek() == '+' || peek() == '-') {
      const double sg = s_[pos_] == '-' ? -1.0 : 1.0;
      ++pos_;
      for (const auto& [k, v] : product()) acc[k] += sg * v;
    }
    return acc;
  }

  static TermMap scale(TermMap t, cplx c) {
    for (auto& [k, v] : t) v *= c;
    return t;
  }

  TermMap product() {
    TermMap acc{{{kNoPol, kNoMode}, 1.0}};
    bool any = false;
    while (true) {
      const char c = peek();
      if (c == '*' && any) {
        ++pos_;
        continue;
      }
      if (!(c == '(' || c == 'H' || c == 'V' || c == '|' || c == 'i' || c == '.' ||
            std::isdigit(static_cast<unsigned char>(c)))) {
        break;
      }
      acc = multiply(acc, unit());
      any = true;
    }
    if (!any) fail("expected a term");
    return acc;
  }

  TermMap unit() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      TermMap inner = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (c == 'H' || c == 'V') {
      ++pos_;
      return {{{c == 'H' ? 0 : 1, kNoMode}, 1.0}};
    }
    if (c == '|') {
      ++pos_;
      skip();
      std::size_t start = pos_;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected an OAM order inside |...>");
      const auto l = parse_integer(s_.substr(start, pos_ - start), start);
      if (peek() != '>') fail("expected '>'");
      ++pos_;
      return {{{kNoPol, static_cast<int>(l)}, 1.0}};
    }
    if (c == 'i') {
      ++pos_;
      return {{{kNoPol, kNoMode}, cplx(0.0, 1.0)}};
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      ++pos_;
    }
    const double v = parse_number(s_.substr(start, pos_ - start), start);
    if (pos_ < s_.size() && s_[pos_] == 'i') {
      ++pos_;
      return {{{kNoPol, kNoMode}, cplx(0.0, v)}};
    }
    return {{{kNoPol, kNoMode}, v}};
  }

  TermMap multiply(const TermMap& a, const TermMap& b) {
    TermMap out;
    for (const auto& [ka, va] : a) {
      for (const auto& [kb, vb] : b) {
        if (ka.first != kNoPol && kb.first != kNoPol) fail("two polarization factors in one term");
        if (ka.second != kNoMode && kb.second != kNoMode) fail("two OAM factors in one term");
        const std::pair<int, int> k{ka.first != kNoPol ? ka.first : kb.first,
                                    ka.second != kNoMode ? ka.second : kb.second};
        out[k] += va * vb;
      }
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::vector<StateEntry> ket_entries(std::string_view text, std::size_t offset) {
  TermMap terms;
  try {
    terms = KetParser(text).parse();
  } catch (const ValueError& e) {
    throw ValueError{offset + e.offset, e.message};
  }
  std::vector<StateEntry> out;
  for (const auto& [k, v] : terms) {
    if (k.first == kNoPol) throw ValueError{offset, "term without polarization (H or V)"};
    if (k.second == kNoMode) throw ValueError{offset, "term without an OAM ket |l>"};
    if (v != cplx(0.0)) out.push_back({static_cast<Polarization>(k.first), k.second, v});
  }
  if (out.empty()) throw ValueError{offset, "state expression has no nonzero terms"};
  return out;
}

// Polarization-only expression such as `H+V` or `(H - iV)`.
Eigen::Vector2cd polarization_vector(std::string_view text, std::size_t offset) {
  TermMap terms;
  try {
    terms = KetParser(text).parse();
  } catch (const ValueError& e) {
    throw ValueError{offset + e.offset, e.message};
  }
  Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
  for (const auto& [k, c] : terms) {
    if (k.second != kNoMode) throw ValueError{offset, "polarization may not contain OAM kets"};
    if (k.first == kNoPol) throw ValueError{offset, "term without polarization (H or V)"};
    v(k.first) += c;
  }
  if (v.squaredNorm() == 0.0) throw ValueError{offset, "zero polarization vector"};
  return v;
}

// ---- scenario text --------------------------------------------------------

struct Line {
  int number;
  std::string_view key;
  int key_col;
  std::string_view value;
  int value_col;
};

enum class Section { top, circuit, input, detection, images, errors, sweep, gate, compensation };

std::optional<Section> section_from(std::string_view name) {
  static const std::map<std::string_view, Section> kSections = {
      {"circuit", Section::circuit}, {"input", Section::input},
      {"detection", Section::detection}, {"images", Section::images},
      {"errors", Section::errors}, {"sweep", Section::sweep},
      {"gate", Section::gate}, {"compensation", Section::compensation}};
  auto it = kSections.find(name);
  if (it == kSections.end()) return std::nullopt;
  return it->second;
}

class ScenarioParser {
 public:
  Scenario parse(std::string_view text) {
    std::size_t pos = 0;
    int number = 0;
    Section section = Section::top;
    while (pos <= text.size()) {
      const auto eol = text.find('\n', pos);
      std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                            : eol - pos);
      ++number;
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      std::size_t lead = 0;
      while (lead < raw.size() && is_space(raw[lead])) ++lead;
      const std::string_view body = trim(raw);
      if (body.empty()) continue;

      if (body.front() == '[') {
        if (body.back() != ']') throw ParseError(number, static_cast<int>(lead) + 1, "unterminated section header");
        const auto name = trim(body.substr(1, body.size() - 2));
        auto s = section_from(name);
        if (!s) throw ParseError(number, static_cast<int>(lead) + 2, "unknown section [" + std::string(name) + "]");
        section = *s;
        section_lines_[section] = number;
        continue;
      }
      const auto eq = raw.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(number, static_cast<int>(lead) + 1, "expected 'key = value'");
      }
      Line ln;
      ln.number = number;
      ln.key = trim(raw.substr(0, eq));
      ln.key_col = static_cast<int>(lead) + 1;
      std::size_t vlead = eq + 1;
      while (vlead < raw.size() && is_space(raw[vlead])) ++vlead;
      ln.value = trim(raw.substr(eq + 1));
      ln.value_col = static_cast<int>(vlead) + 1;
      if (ln.key.empty()) throw ParseError(number, ln.key_col, "missing key before '='");
      if (ln.value.empty()) throw ParseError(number, ln.value_col, "missing value for '" + std::string(ln.key) + "'");
      handle(section, ln);
    }
    return finish();
  }

 private:
  template <typename F>
  auto value(const Line& ln, F&& f) -> decltype(f(ln.value, std::size_t{0})) {
    try {
      return f(ln.value, std::size_t{0});
    } catch (const ValueError& e) {
      throw ParseError(ln.number, ln.value_col + static_cast<int>(e.offset), e.message);
    } catch (const std::invalid_argument& e) {
      throw ParseError(ln.number, ln.value_col, e.what());
    } catch (const std::out_of_range& e) {
      throw ParseError(ln.number, ln.value_col, e.what());
    }
  }

  double angle(const Line& ln) { return value(ln, angle_at); }
  double number(const Line& ln) { return value(ln, [](auto s, auto o) { return parse_number(s, o); }); }
  long long integer(const Line& ln) {
    return value(ln, [](auto s, auto o) { return parse_integer(s, o); });
  }

  [[noreturn]] void unknown(const Line& ln, const char* section) {
    throw ParseError(ln.number, ln.key_col,
                     "unknown key '" + std::string(ln.key) + "' in " + section);
  }

  void remember(const std::string& what, const Line& ln) { where_[what] = {ln.number, ln.value_col}; }

  void handle(Section s, const Line& ln) {
    const std::string key(ln.key);
    switch (s) {
      case Section::top:
        if (key == "name") {
          sc_.name = std::string(ln.value);
        } else if (key == "seed") {
          const auto v = integer(ln);
          if (v < 0) throw ParseError(ln.number, ln.value_col, "seed must be non-negative");
          sc_.seed = static_cast<std::uint64_t>(v);
        } else if (key == "lmax") {
          const auto v = integer(ln);
          if (v < 0 || v > 64) throw ParseError(ln.number, ln.value_col, "lmax must be in [0, 64]");
          sc_.l_max = static_cast<int>(v);
          remember("lmax", ln);
        } else if (key == "outputs") {
          outputs(ln);
        } else {
          unknown(ln, "the top level");
        }
        break;
      case Section::circuit: circuit(key, ln); break;
      case Section::input: input(key, ln); break;
      case Section::detection:
        if (key == "theta") {
          sc_.detection_theta = angle(ln);
          detection_set_ = true;
        } else if (key == "cascade") {
          if (ln.value == "pmm2") sc_.cascade_pmm2 = true;
          else if (ln.value == "none") sc_.cascade_pmm2 = false;
          else throw ParseError(ln.number, ln.value_col, "cascade must be 'pmm2' or 'none'");
        } else {
          unknown(ln, "[detection]");
        }
        break;
      case Section::images: images(key, ln); break;
      case Section::errors: errors(key, ln); break;
      case Section::sweep: {
        if (!sc_.sweep) sc_.sweep.emplace();
        if (key == "modes") sc_.sweep->modes = value(ln, int_list), remember("sweep.modes", ln);
        else if (key == "delta") sc_.sweep->deltas = value(ln, angle_list);
        else unknown(ln, "[sweep]");
        break;
      }
      case Section::gate: {
        if (!sc_.gate) sc_.gate.emplace();
        if (key == "n") sc_.gate->moduli = value(ln, int_list);
        else if (key == "d") sc_.gate->dimensions = value(ln, int_list);
        else unknown(ln, "[gate]");
        break;
      }
      case Section::compensation: {
        if (!sc_.compensation) sc_.compensation.emplace();
        if (key == "d") sc_.compensation->dimensions = value(ln, int_list);
        else if (key == "alpha") sc_.compensation->alpha = angle(ln);
        else if (key == "restarts") {
          const auto v = integer(ln);
          if (v < 1) throw ParseError(ln.number, ln.value_col, "restarts must be >= 1");
          sc_.compensation->restarts = static_cast<int>(v);
        } else {
          unknown(ln, "[compensation]");
        }
        break;
      }
    }
  }

  void outputs(const Line& ln) {
    for (auto [piece, off] : split(ln.value, ',')) {
      static const std::map<std::string_view, Output> kOut = {
          {"ports-csv", Output::ports_csv}, {"image", Output::image},
          {"fidelity", Output::fidelity}, {"gate-check", Output::gate_check},
          {"sweep", Output::sweep}, {"montecarlo", Output::montecarlo},
          {"compensation", Output::compensation}};
      auto it = kOut.find(piece);
      if (it == kOut.end()) {
        throw ParseError(ln.number, ln.value_col + static_cast<int>(off),
                         "unknown output '" + std::string(piece) + "'");
      }
      sc_.outputs.insert(it->second);
    }
    remember("outputs", ln);
  }

  void circuit(const std::string& key, const Line& ln) {
    auto& c = sc_.circuit;
    if (key == "kind") {
      auto k = circuit_kind_from_string(std::string(ln.value));
      if (!k) throw ParseError(ln.number, ln.value_col, "unknown circuit kind '" + std::string(ln.value) + "'");
      c.kind = *k;
      kind_set_ = true;
    } else if (key == "alpha" || key == "alpha1" || key == "alpha2" || key == "theta1" ||
               key == "theta2" || key == "theta3" || key == "theta4") {
      c.angles[key] = angle(ln);
    } else if (key == "t_par" || key == "t_perp" || key == "dp2_t_par" || key == "dp2_t_perp") {
      dp_values_[key] = number(ln);
      remember("dp", ln);
    } else if (key == "delta_phi" || key == "dp2_delta_phi") {
      dp_values_[key] = angle(ln);
      remember("dp", ln);
    } else if (key == "element") {
      element(ln);
    } else {
      unknown(ln, "[circuit]");
    }
  }

  void element(const Line& ln) {
    std::vector<std::pair<std::string_view, std::size_t>> parts;
    for (auto [p, off] : split(ln.value, ' ')) if (!p.empty()) parts.emplace_back(p, off);
    if (parts.size() < 2 || parts.size() > 3) {
      throw ParseError(ln.number, ln.value_col, "element expects '<hwp|qwp|dp> <angle> [a|b]'");
    }
    ElementSpec e;
    if (parts[0].first == "hwp") e.kind = ElementKind::hwp;
    else if (parts[0].first == "qwp") e.kind = ElementKind::qwp;
    else if (parts[0].first == "dp") e.kind = ElementKind::dove_prism;
    else throw ParseError(ln.number, ln.value_col, "unknown element '" + std::string(parts[0].first) + "'");
    try {
      e.angle = angle_at(parts[1].first, parts[1].second);
    } catch (const ValueError& err) {
      throw ParseError(ln.number, ln.value_col + static_cast<int>(err.offset), err.message);
    }
    if (parts.size() == 3) {
      if (parts[2].first == "a") e.direction = Direction::a;
      else if (parts[2].first == "b") e.direction = Direction::b;
      else throw ParseError(ln.number, ln.value_col + static_cast<int>(parts[2].second), "direction must be a or b");
    }
    element_lines_.push_back(ln.number);
    sc_.circuit.sequence.push_back(e);
  }

  void input(const std::string& key, const Line& ln) {
    if (key == "state") {
      auto entries = value(ln, ket_entries);
      sc_.input.insert(sc_.input.end(), entries.begin(), entries.end());
      remember("input", ln);
    } else if (key == "entry") {
      auto parts = split(ln.value, ' ');
      std::erase_if(parts, [](const auto& p) { return p.first.empty(); });
      if (parts.size() != 3 && parts.size() != 4) {
        throw ParseError(ln.number, ln.value_col, "entry expects '<H|V> <l> <re> [im]'");
      }
      Polarization p;
      if (parts[0].first == "H") p = Polarization::H;
      else if (parts[0].first == "V") p = Polarization::V;
      else throw ParseError(ln.number, ln.value_col, "polarization must be H or V");
      try {
        const int l = static_cast<int>(parse_integer(parts[1].first, parts[1].second));
        const double re = parse_number(parts[2].first, parts[2].second);
        const double im = parts.size() == 4 ? parse_number(parts[3].first, parts[3].second) : 0.0;
        sc_.input.push_back({p, l, cplx(re, im)});
      } catch (const ValueError& e) {
        throw ParseError(ln.number, ln.value_col + static_cast<int>(e.offset), e.message);
      }
      remember("input", ln);
    } else if (key == "modes") {
      sc_.mode_scan = value(ln, int_list);
      remember("input", ln);
    } else if (key == "polarization") {
      sc_.scan_polarization = value(ln, polarization_vector);
    } else {
      unknown(ln, "[input]");
    }
  }

  void images(const std::string& key, const Line& ln) {
    auto& im = sc_.images;
    if (key == "side") {
      const auto v = integer(ln);
      if (v < 16 || v > 8192) throw ParseError(ln.number, ln.value_col, "side must be in [16, 8192]");
      im.grid.side = static_cast<int>(v);
    } else if (key == "extent") {
      im.grid.extent = number(ln);
      if (!(im.grid.extent > 0.0)) throw ParseError(ln.number, ln.value_col, "extent must be > 0");
    } else if (key == "format") {
      if (ln.value == "p2") im.format = GraymapFormat::p2;
      else if (ln.value == "p5") im.format = GraymapFormat::p5;
      else throw ParseError(ln.number, ln.value_col, "format must be p2 or p5");
    } else {
      static const std::map<std::string_view, ImageSource> kSrc = {
          {"input", ImageSource::input}, {"output", ImageSource::output},
          {"baseline", ImageSource::baseline}, {"port1", ImageSource::port1},
          {"port2", ImageSource::port2}};
      auto it = kSrc.find(ln.value);
      if (it == kSrc.end()) {
        throw ParseError(ln.number, ln.value_col,
                         "image source must be input, output, baseline, port1 or port2");
      }
      for (char ch : ln.key) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) {
          throw ParseError(ln.number, ln.key_col, "image names may use letters, digits, '_' and '-'");
        }
      }
      im.requests.push_back({key, it->second});
    }
  }

  void errors(const std::string& key, const Line& ln) {
    if (!sc_.montecarlo) sc_.montecarlo.emplace();
    auto& mc = *sc_.montecarlo;
    if (key == "distribution") {
      if (ln.value == "fixed") mc.model.distribution = ErrorDistribution::fixed;
      else if (ln.value == "uniform") mc.model.distribution = ErrorDistribution::uniform;
      else throw ParseError(ln.number, ln.value_col, "distribution must be fixed or uniform");
    } else if (key == "delta") {
      mc.model.delta = angle(ln);
    } else if (auto id = element_id_from_string(key)) {
      mc.model.per_element[*id] = angle(ln);
    } else if (key == "samples") {
      const auto v = integer(ln);
      if (v < 1) throw ParseError(ln.number, ln.value_col, "samples must be >= 1");
      mc.samples = static_cast<std::size_t>(v);
    } else if (key == "modes") {
      mc.modes = value(ln, int_list);
      remember("errors.modes", ln);
    } else {
      unknown(ln, "[errors]");
    }
    remember("errors", ln);
  }

  std::pair<int, int> where(const std::string& what) const {
    auto it = where_.find(what);
    return it == where_.end() ? std::pair{1, 1} : it->second;
  }

  void check_modes(const std::vector<int>& modes, const std::string& what) {
    for (int l : modes) {
      if (std::abs(l) > sc_.l_max) {
        auto [line, col] = where(what);
        throw ParseError(line, col, "OAM order " + std::to_string(l) + " exceeds lmax " +
                                        std::to_string(sc_.l_max));
      }
    }
  }

  Scenario finish() {
    if (sc_.name.empty()) throw ParseError(1, 1, "missing required key 'name'");
    if (sc_.outputs.empty()) throw ParseError(1, 1, "missing required key 'outputs'");
    if (!kind_set_) {
      auto it = section_lines_.find(Section::circuit);
      throw ParseError(it == section_lines_.end() ? 1 : it->second, 1,
                       "missing required key 'kind' in [circuit]");
    }
    sc_.circuit.l_max = sc_.l_max;

    // Prisms: dp2 copies dp1 unless overridden.
    auto dpv = [&](const char* k, double d) {
      auto it = dp_values_.find(k);
      return it == dp_values_.end() ? d : it->second;
    };
    try {
      const double tp = dpv("t_par", 1.0), tq = dpv("t_perp", 1.0), ph = dpv("delta_phi", 0.0);
      sc_.circuit.prisms["dp1"] = DPParams(tp, tq, ph, 0.0);
      sc_.circuit.prisms["dp2"] = DPParams(dpv("dp2_t_par", tp), dpv("dp2_t_perp", tq),
                                           dpv("dp2_delta_phi", ph), 0.0);
      for (auto& e : sc_.circuit.sequence) e.dp = sc_.circuit.prisms["dp1"];
    } catch (const std::invalid_argument& e) {
      auto [line, col] = where("dp");
      throw ParseError(line, col, e.what());
    }
    if (sc_.circuit.kind == CircuitKind::pmm2_stage) sc_.circuit.angles.try_emplace("alpha", pi / 8.0);
    try {
      sc_.circuit = sc_.circuit.resolved();
    } catch (const std::invalid_argument& e) {
      auto it = section_lines_.find(Section::circuit);
      throw ParseError(it == section_lines_.end() ? 1 : it->second, 1, e.what());
    }

    if (!detection_set_) sc_.detection_theta = pi / 8.0;

    std::vector<int> input_modes;
    for (const auto& e : sc_.input) input_modes.push_back(e.l);
    check_modes(input_modes, "input");
    check_modes(sc_.mode_scan, "input");
    if (sc_.sweep) check_modes(sc_.sweep->modes, "sweep.modes");
    if (sc_.montecarlo) {
      check_modes(sc_.montecarlo->modes, "errors.modes");
      try {
        sc_.montecarlo->model.validate();
      } catch (const std::invalid_argument& e) {
        auto [line, col] = where("errors");
        throw ParseError(line, col, e.what());
      }
    }

    auto need = [&](Output o, bool ok, const std::string& msg) {
      if (sc_.outputs.count(o) && !ok) {
        auto [line, col] = where("outputs");
        throw ParseError(line, col, msg);
      }
    };
    const bool has_input = !sc_.input.empty() || !sc_.mode_scan.empty();
    need(Output::ports_csv, has_input, "ports-csv needs an [input] state or modes");
    need(Output::fidelity, has_input, "fidelity needs an [input] state or modes");
    need(Output::image, !sc_.images.requests.empty() && !sc_.input.empty(),
         "image needs an [input] state and at least one entry in [images]");
    need(Output::sweep, sc_.sweep && !sc_.sweep->modes.empty() && !sc_.sweep->deltas.empty(),
         "sweep needs [sweep] modes and delta");
    need(Output::gate_check, sc_.gate && !sc_.gate->moduli.empty() && !sc_.gate->dimensions.empty(),
         "gate-check needs [gate] n and d");
    need(Output::montecarlo, sc_.montecarlo && !sc_.montecarlo->modes.empty(),
         "montecarlo needs [errors] with modes");
    need(Output::compensation, sc_.compensation && !sc_.compensation->dimensions.empty(),
         "compensation needs [compensation] d");
    if (sc_.gate) {
      for (int d : sc_.gate->dimensions) {
        if (d < 2 || d - 1 > sc_.l_max) {
          auto [line, col] = where("outputs");
          throw ParseError(line, col, "gate dimension " + std::to_string(d) + " outside [2, lmax+1]");
        }
      }
    }
    if (sc_.compensation) {
      for (int d : sc_.compensation->dimensions) {
        if (d < 1 || d - 1 > sc_.l_max) {
          auto [line, col] = where("outputs");
          throw ParseError(line, col, "compensation dimension " + std::to_string(d) + " outside [1, lmax+1]");
        }
      }
    }
    return sc_;
  }

  Scenario sc_;
  bool kind_set_ = false;
  bool detection_set_ = false;
  std::map<std::string, double> dp_values_;
  std::map<std::string, std::pair<int, int>> where_;
  std::map<Section, int> section_lines_;
  std::vector<int> element_lines_;
};

}  // namespace

double parse_angle(std::string_view text) {
  try {
    return angle_at(text, 0);
  } catch (const ValueError& e) {
    throw std::invalid_argument("bad angle '" + std::string(text) + "': " + e.message);
  }
}

std::vector<int> parse_int_list(std::string_view text) {
  try {
    return int_list(text, 0);
  } catch (const ValueError& e) {
    throw std::invalid_argument("bad list '" + std::string(text) + "': " + e.message);
  }
}

std::vector<double> parse_angle_list(std::string_view text) {
  try {
    return angle_list(text, 0);
  } catch (const ValueError& e) {
    throw std::invalid_argument("bad angle list '" + std::string(text) + "': " + e.message);
  }
}

std::vector<StateEntry> parse_state_expression(std::string_view text) {
  try {
    return ket_entries(text, 0);
  } catch (const ValueError& e) {
    throw std::invalid_argument("bad state '" + std::string(text) + "' at offset " +
                                std::to_string(e.offset) + ": " + e.message);
  }
}

Scenario parse_scenario(std::string_view text) { return ScenarioParser().parse(text); }

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace pmm
