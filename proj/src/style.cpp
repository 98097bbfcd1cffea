#include "coinmath/style.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <unordered_set>

#include "coinmath/util.hpp"

namespace coinmath::style {

namespace {

// ---------------------------------------------------------------------------
// Lexer for the Python subset found in math rationales.

enum class TokKind { name, number, string, op };

struct Token {
  TokKind kind;
  std::string text;
  int line;
};

struct LogicalLine {
  int indent = 0;
  int first_line = 0;
  int last_line = 0;
  std::vector<Token> tokens;

  bool only_strings() const {
    return !tokens.empty() && std::all_of(tokens.begin(), tokens.end(),
                                          [](const Token& t) { return t.kind == TokKind::string; });
  }
};

struct Comment {
  int line;
  bool full_line;
};

struct Lexed {
  std::vector<LogicalLine> lines;
  std::vector<Comment> comments;
  bool ok = true;
  std::string error;
  int error_line = 0;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> kKeywords = {
      "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
      "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
      "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise",
      "return", "try", "while", "with", "yield"};
  return kKeywords;
}

bool is_string_prefix(std::string_view name) {
  static const std::set<std::string> kPrefixes = {"r", "u", "b", "f", "br", "rb", "fr", "rf"};
  return kPrefixes.count(to_lower(name)) > 0;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Lexed run() {
    std::vector<int> indents{0};
    bool expect_indent = false;
    while (pos_ < src_.size() && out_.ok) {
      // Start of a physical line outside any bracket: indentation.
      int indent = 0;
      while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) {
        indent = src_[pos_] == '\t' ? (indent / 8 + 1) * 8 : indent + 1;
        ++pos_;
      }
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == '\n' || c == '\r') {
        skip_newline();
        continue;
      }
      if (c == '#') {
        lex_comment(true);
        continue;
      }
      if (expect_indent) {
        if (indent <= indents.back()) return fail("expected an indented block");
        indents.push_back(indent);
        expect_indent = false;
      } else if (indent > indents.back()) {
        return fail("unexpected indent");
      } else {
        while (indent < indents.back()) indents.pop_back();
        if (indent != indents.back()) return fail("unindent does not match any outer level");
      }
      LogicalLine ll;
      ll.indent = indent;
      ll.first_line = line_;
      lex_logical_line(ll);
      if (!out_.ok) break;
      ll.last_line = last_token_line_;
      if (!ll.tokens.empty() && ll.tokens.back().kind == TokKind::op && ll.tokens.back().text == ":")
        expect_indent = true;
      out_.lines.push_back(std::move(ll));
    }
    if (out_.ok && expect_indent) return fail("expected an indented block");
    return std::move(out_);
  }

 private:
  void set_error(std::string message) {
    if (!out_.ok) return;
    out_.ok = false;
    out_.error = std::move(message);
    out_.error_line = line_;
  }

  Lexed fail(std::string message) {
    set_error(std::move(message));
    return std::move(out_);
  }

  void skip_newline() {
    if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
    ++pos_;
    ++line_;
    line_has_token_ = false;
  }

  void lex_comment(bool full_line) {
    out_.comments.push_back({line_, full_line});
    while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
  }

  void push(TokKind kind, std::string text, int line) {
    cur_->tokens.push_back({kind, std::move(text), line});
    last_token_line_ = line_;
    line_has_token_ = true;
  }

  void lex_logical_line(LogicalLine& ll) {
    cur_ = &ll;
    std::vector<char> brackets;
    line_has_token_ = false;
    while (pos_ < src_.size() && out_.ok) {
      char c = src_[pos_];
      if (c == '\n' || c == '\r') {
        skip_newline();
        if (brackets.empty()) return;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
        continue;
      }
      if (c == '#') {
        lex_comment(!line_has_token_);
        continue;
      }
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
          ++pos_;
          skip_newline();
          continue;
        }
        return set_error("stray backslash");
      }
      if (c == '"' || c == '\'') {
        lex_string();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && is_string_prefix(name)) {
          lex_string();
          continue;
        }
        push(TokKind::name, std::move(name), line_);
        continue;
      }
      if (static_cast<unsigned char>(c) >= 0x80) return set_error("non-ASCII character outside string");
      if (c == '(' || c == '[' || c == '{') {
        brackets.push_back(c);
        push(TokKind::op, std::string(1, c), line_);
        ++pos_;
        continue;
      }
      if (c == ')' || c == ']' || c == '}') {
        char want = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (brackets.empty() || brackets.back() != want) return set_error("unmatched closing bracket");
        brackets.pop_back();
        push(TokKind::op, std::string(1, c), line_);
        ++pos_;
        continue;
      }
      if (!lex_operator()) return set_error(std::string("unexpected character '") + c + "'");
    }
    if (!brackets.empty() && out_.ok) set_error("unclosed bracket at end of input");
  }

  bool lex_operator() {
    static const std::vector<std::string_view> kOps = {
        "**=", "//=", ">>=", "<<=", "...", "->", ":=", "==", "!=", "<=", ">=", "**", "//", "<<",
        ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/",
        "%", "@", "&", "|", "^", "~", "<", ">", ",", ":", ".", ";", "="};
    std::string_view rest = src_.substr(pos_);
    for (auto op : kOps) {
      if (rest.starts_with(op)) {
        push(TokKind::op, std::string(op), line_);
        pos_ += op.size();
        return true;
      }
    }
    return false;
  }

  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        ++pos_;
      } else if ((c == '+' || c == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                 !(src_.substr(start, 2) == "0x" || src_.substr(start, 2) == "0X")) {
        ++pos_;
      } else {
        break;
      }
    }
    push(TokKind::number, std::string(src_.substr(start, pos_ - start)), line_);
  }

  void lex_string() {
    int start_line = line_;
    char q = src_[pos_];
    bool triple = src_.substr(pos_, 3) == std::string(3, q);
    std::size_t start = pos_;
    pos_ += triple ? 3 : 1;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\' && pos_ + 1 < src_.size()) {
        if (src_[pos_ + 1] == '\n') ++line_;
        pos_ += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) return set_error("unterminated string literal");
        ++line_;
        ++pos_;
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++pos_;
          push(TokKind::string, std::string(src_.substr(start, pos_ - start)), start_line);
          return;
        }
        if (src_.substr(pos_, 3) == std::string(3, q)) {
          pos_ += 3;
          push(TokKind::string, std::string(src_.substr(start, pos_ - start)), start_line);
          return;
        }
      }
      ++pos_;
    }
    set_error("unterminated string literal");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int last_token_line_ = 1;
  bool line_has_token_ = false;
  LogicalLine* cur_ = nullptr;
  Lexed out_;
};

Lexed lex(std::string_view code) { return Lexer(code).run(); }

// ---------------------------------------------------------------------------
// Identifier collection

struct Binding {
  std::string name;
  int line;
};

struct FunctionDef {
  std::string name;
  int param_count = 0;
  int first_line = 0;
  int body_end_line = 0;
};

bool is_op(const Token& t, std::string_view text) {
  return t.kind == TokKind::op && t.text == text;
}

bool is_open(const Token& t) { return t.kind == TokKind::op && (t.text == "(" || t.text == "[" || t.text == "{"); }
bool is_close(const Token& t) { return t.kind == TokKind::op && (t.text == ")" || t.text == "]" || t.text == "}"); }

bool is_augmented(const Token& t) {
  static const std::set<std::string> kAug = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                             ">>=", "<<=", "&=", "|=", "^=", "@="};
  return t.kind == TokKind::op && kAug.count(t.text) > 0;
}

// Names bound at bracket depth <= max_depth in tokens[begin, end): plain names
// not part of attribute access, calls, or subscripts.
void bound_names(const std::vector<Token>& toks, std::size_t begin, std::size_t end,
                 std::vector<Binding>& out, int max_depth = 1) {
  int depth = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const Token& t = toks[i];
    if (is_open(t)) {
      ++depth;
      continue;
    }
    if (is_close(t)) {
      --depth;
      continue;
    }
    if (t.kind != TokKind::name || depth > max_depth || keywords().count(t.text)) continue;
    if (i > begin && is_op(toks[i - 1], ".")) continue;
    if (i + 1 < end && (is_op(toks[i + 1], ".") || is_op(toks[i + 1], "(") || is_op(toks[i + 1], "[")))
      continue;
    out.push_back({t.text, t.line});
  }
}

struct Collected {
  std::vector<Binding> identifiers;
  std::vector<FunctionDef> functions;
};

Collected collect(const Lexed& lexed) {
  Collected c;
  const auto& lines = lexed.lines;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& toks = lines[li].tokens;
    if (toks.empty()) continue;
    const std::string& head = toks[0].text;

    if (head == "def" && toks.size() > 1 && toks[1].kind == TokKind::name) {
      FunctionDef fn;
      fn.name = toks[1].text;
      fn.first_line = lines[li].first_line;
      c.identifiers.push_back({fn.name, toks[1].line});
      // Parameters: first name of each top-level comma segment.
      std::size_t i = 2;
      if (i < toks.size() && is_op(toks[i], "(")) {
        int depth = 0;
        bool expect_param = true;
        for (++i; i < toks.size(); ++i) {
          if (is_open(toks[i])) ++depth;
          if (is_close(toks[i])) {
            if (depth == 0) break;
            --depth;
          }
          if (depth != 0) continue;
          if (is_op(toks[i], ",")) {
            expect_param = true;
          } else if (expect_param && toks[i].kind == TokKind::name) {
            expect_param = false;
            if (toks[i].text == "self" || toks[i].text == "cls") continue;
            ++fn.param_count;
            c.identifiers.push_back({toks[i].text, toks[i].line});
          }
        }
      }
      // Body: following logical lines indented deeper than the def.
      fn.body_end_line = lines[li].last_line;
      for (std::size_t lj = li + 1; lj < lines.size() && lines[lj].indent > lines[li].indent; ++lj)
        fn.body_end_line = lines[lj].last_line;
      c.functions.push_back(fn);
      continue;
    }
    if (head == "class" && toks.size() > 1 && toks[1].kind == TokKind::name) {
      c.identifiers.push_back({toks[1].text, toks[1].line});
      continue;
    }
    if (head == "import" || head == "from" || head == "global" || head == "nonlocal") continue;

    // for-targets, including comprehensions.
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (!(toks[i].kind == TokKind::name && toks[i].text == "for")) continue;
      std::size_t j = i + 1;
      while (j < toks.size() && !(toks[j].kind == TokKind::name && toks[j].text == "in")) ++j;
      std::vector<Binding> targets;
      bound_names(toks, i + 1, j, targets);
      for (auto& b : targets) {
        // Conventional loop counters say nothing about naming style.
        if (b.name == "i" || b.name == "j" || b.name == "k") continue;
        c.identifiers.push_back(b);
      }
    }
    if (head == "with" || head == "except") {
      for (std::size_t i = 0; i + 1 < toks.size(); ++i)
        if (toks[i].kind == TokKind::name && toks[i].text == "as" && toks[i + 1].kind == TokKind::name)
          c.identifiers.push_back({toks[i + 1].text, toks[i + 1].line});
    }
    // Walrus.
    for (std::size_t i = 1; i < toks.size(); ++i)
      if (is_op(toks[i], ":=") && toks[i - 1].kind == TokKind::name)
        c.identifiers.push_back({toks[i - 1].text, toks[i - 1].line});

    // Assignment targets: every segment left of a top-level '=' or augmented op.
    int depth = 0;
    std::size_t seg_start = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (is_open(toks[i])) ++depth;
      else if (is_close(toks[i])) --depth;
      else if (depth == 0 && (is_op(toks[i], "=") || is_augmented(toks[i]))) {
        bound_names(toks, seg_start, i, c.identifiers);
        seg_start = i + 1;
        if (is_augmented(toks[i])) break;
      } else if (depth == 0 && (toks[i].kind == TokKind::name && (toks[i].text == "lambda")))
        break;
    }
  }
  return c;
}

// Line-based fallback when lexing fails.
Collected collect_degraded(std::string_view code) {
  Collected c;
  static const std::regex kAssign(R"(^\s*([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)\s*(?:[-+*/%]|//|\*\*)?=[^=])");
  static const std::regex kDef(R"(^\s*def\s+([A-Za-z_]\w*)\s*\(([^)]*)\))");
  static const std::regex kName(R"([A-Za-z_]\w*)");
  auto lines = split_lines(code);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int line = static_cast<int>(i) + 1;
    std::smatch m;
    if (std::regex_search(lines[i], m, kDef)) {
      c.identifiers.push_back({m[1].str(), line});
      std::string params = m[2].str();
      for (auto it = std::sregex_iterator(params.begin(), params.end(), kName);
           it != std::sregex_iterator(); ++it)
        c.identifiers.push_back({it->str(), line});
    } else if (std::regex_search(lines[i], m, kAssign)) {
      std::string targets = m[1].str();
      for (auto it = std::sregex_iterator(targets.begin(), targets.end(), kName);
           it != std::sregex_iterator(); ++it)
        if (!keywords().count(it->str())) c.identifiers.push_back({it->str(), line});
    }
  }
  return c;
}

std::vector<ScoredIdentifier> score_unique(const std::vector<Binding>& bindings) {
  std::vector<ScoredIdentifier> out;
  std::set<std::string> seen;
  for (const auto& b : bindings) {
    if (b.name == "_" || b.name.starts_with("__")) continue;
    if (!seen.insert(b.name).second) continue;
    out.push_back({b.name, b.line, identifier_descriptiveness(b.name)});
  }
  return out;
}

double mean_score(const std::vector<ScoredIdentifier>& ids) {
  if (ids.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& id : ids) sum += id.score;
  return sum / static_cast<double>(ids.size());
}

Generality generality_from(const Lexed& lexed, const Collected& c) {
  for (const auto& fn : c.functions) {
    if (fn.param_count == 0) continue;
    for (const auto& ll : lexed.lines) {
      if (ll.first_line >= fn.first_line && ll.last_line <= fn.body_end_line) continue;
      const auto& toks = ll.tokens;
      for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
        if (toks[i].kind != TokKind::name || toks[i].text != fn.name) continue;
        if (i > 0 && is_op(toks[i - 1], ".")) continue;
        if (is_op(toks[i + 1], "(") && !is_op(toks[i + 2], ")")) return Generality::generalized;
      }
    }
  }
  return Generality::hardcoded;
}

bool has_parameterized(const Collected& c) {
  return std::any_of(c.functions.begin(), c.functions.end(),
                     [](const FunctionDef& f) { return f.param_count > 0; });
}

// Short words that carry meaning on their own; anything of length >= 4 with a
// vowel is accepted without a lookup.
const std::unordered_set<std::string>& wordlist() {
  static const std::unordered_set<std::string> kWords = {
      "age", "all", "and", "area", "avg", "bag", "bar", "bed", "bee", "big", "bill", "bin",
      "bit", "box", "boy", "bus", "buy", "cab", "can", "cap", "car", "cat", "cm", "cow",
      "cup", "cut", "day", "dog", "due", "egg", "end", "fee", "fig", "fly", "fox", "ft",
      "gas", "gcd", "hat", "hen", "hot", "hr", "hrs", "ice", "ink", "jar", "key", "kg",
      "kid", "km", "lb", "lbs", "lcm", "leg", "lot", "low", "man", "map", "max", "men",
      "mi", "min", "mix", "ml", "mm", "mph", "net", "new", "num", "nut", "odd", "oil",
      "old", "one", "out", "own", "oz", "pay", "pen", "per", "pet", "pi", "pie", "pig",
      "pin", "pot", "raw", "red", "row", "run", "saw", "sea", "set", "six", "sky", "son",
      "sum", "sun", "tax", "tea", "ten", "tip", "top", "toy", "two", "use", "usd", "van",
      "way", "web", "win", "won", "yen", "zoo"};
  return kWords;
}

std::vector<std::string> segments(std::string_view ident) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(to_lower(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < ident.size(); ++i) {
    char c = ident[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!cur.empty()) {
      char p = cur.back();
      bool digit_boundary = std::isdigit(static_cast<unsigned char>(c)) != std::isdigit(static_cast<unsigned char>(p));
      bool camel = std::islower(static_cast<unsigned char>(p)) && std::isupper(static_cast<unsigned char>(c));
      bool acronym_end = std::isupper(static_cast<unsigned char>(p)) && std::isupper(static_cast<unsigned char>(c)) &&
                         i + 1 < ident.size() && std::islower(static_cast<unsigned char>(ident[i + 1]));
      if (digit_boundary || camel || acronym_end) flush();
    }
    cur.push_back(c);
  }
  flush();
  std::erase_if(out, [](const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  });
  return out;
}

bool segment_descriptive(const std::string& seg) {
  if (wordlist().count(seg)) return true;
  if (seg.size() < 4) return false;
  return seg.find_first_of("aeiouy") != std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------------------

double identifier_descriptiveness(std::string_view identifier) {
  auto segs = segments(identifier);
  if (segs.empty()) return 0.0;
  std::size_t good = std::count_if(segs.begin(), segs.end(), segment_descriptive);
  return static_cast<double>(good) / static_cast<double>(segs.size());
}

CommentUsage classify_comment_usage(double ratio, const Thresholds& t) {
  if (ratio < t.t_low) return CommentUsage::no_comment;
  if (ratio < t.t_high) return CommentUsage::concise;
  return CommentUsage::detailed;
}

Naming classify_naming(double score, const Thresholds& t) {
  return score >= t.t_name ? Naming::descriptive : Naming::obscure;
}

NamingScore score_naming(std::string_view code) {
  NamingScore ns;
  Lexed lexed = lex(code);
  Collected c = lexed.ok ? collect(lexed) : collect_degraded(code);
  ns.parse_degraded = !lexed.ok;
  ns.identifiers = score_unique(c.identifiers);
  ns.score = mean_score(ns.identifiers);
  return ns;
}

Generality detect_generality(std::string_view code) {
  Lexed lexed = lex(code);
  if (!lexed.ok) return Generality::hardcoded;
  return generality_from(lexed, collect(lexed));
}

AuditReport audit(std::string_view code, const Thresholds& thresholds) {
  if (trim(code).empty()) throw UsageError("audit: empty code");
  AuditReport r;
  Lexed lexed = lex(code);
  r.parse_degraded = !lexed.ok;
  auto lines = split_lines(code);

  std::vector<bool> nonblank(lines.size() + 2, false);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!trim(lines[i]).empty()) {
      nonblank[i + 1] = true;
      ++r.nonblank_lines;
    }
  }

  // Per-line comment weight: a full comment or docstring line counts 1, a
  // trailing comment 0.5. A line never counts more than 1.
  std::map<int, double> weight;
  if (lexed.ok) {
    for (const auto& cm : lexed.comments) {
      double w = cm.full_line ? 1.0 : 0.5;
      weight[cm.line] = std::max(weight[cm.line], w);
      r.evidence.push_back({cm.full_line ? "comment" : "inline_comment", lines[cm.line - 1], cm.line, w});
    }
    for (const auto& ll : lexed.lines) {
      if (!ll.only_strings()) continue;
      for (int ln = ll.first_line; ln <= ll.last_line; ++ln) {
        if (ln < static_cast<int>(nonblank.size()) && nonblank[ln]) {
          weight[ln] = 1.0;
          r.evidence.push_back({"docstring", lines[ln - 1], ln, 1.0});
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string t = trim(lines[i]);
      int ln = static_cast<int>(i) + 1;
      if (t.starts_with("#")) {
        weight[ln] = 1.0;
        r.evidence.push_back({"comment", lines[i], ln, 1.0});
      } else if (lines[i].find(" #") != std::string::npos || lines[i].find("\t#") != std::string::npos) {
        weight[ln] = 0.5;
        r.evidence.push_back({"inline_comment", lines[i], ln, 0.5});
      }
    }
  }
  for (const auto& [ln, w] : weight) r.comment_lines += w;
  r.comment_line_ratio =
      r.nonblank_lines == 0 ? 0.0 : std::clamp(r.comment_lines / r.nonblank_lines, 0.0, 1.0);

  Collected c = lexed.ok ? collect(lexed) : collect_degraded(code);
  auto ids = score_unique(c.identifiers);
  r.identifier_score = mean_score(ids);
  for (const auto& id : ids) r.evidence.push_back({"identifier", id.name, id.line, id.score});

  r.has_parameterized_function = has_parameterized(c);
  r.profile.comment_usage = classify_comment_usage(r.comment_line_ratio, thresholds);
  r.profile.naming = classify_naming(r.identifier_score, thresholds);
  r.profile.generality = lexed.ok ? generality_from(lexed, c) : Generality::hardcoded;
  return r;
}

std::string strip_comments(std::string_view code) {
  std::string out;
  out.reserve(code.size());
  std::size_t i = 0;
  while (i < code.size()) {
    char c = code[i];
    if (c == '#') {
      while (i < code.size() && code[i] != '\n') ++i;
      continue;
    }
    if (c == '"' || c == '\'') {
      bool triple = code.substr(i, 3) == std::string(3, c);
      std::size_t len = triple ? 3 : 1;
      out.append(code.substr(i, len));
      i += len;
      while (i < code.size()) {
        if (code[i] == '\\' && i + 1 < code.size()) {
          out.append(code.substr(i, 2));
          i += 2;
          continue;
        }
        if (!triple && code[i] == '\n') break;
        if (code.substr(i, len) == std::string(len, c)) {
          out.append(code.substr(i, len));
          i += len;
          break;
        }
        out.push_back(code[i++]);
      }
      continue;
    }
    out.push_back(c);
    ++i;
  }
  // Trailing spaces left behind by removed inline comments.
  std::string cleaned;
  for (const auto& line : split_lines(out)) cleaned += rtrim(line) + "\n";
  return cleaned;
}

bool has_statement(std::string_view code) {
  Lexed lexed = lex(code);
  if (lexed.ok) {
    return std::any_of(lexed.lines.begin(), lexed.lines.end(),
                       [](const LogicalLine& ll) { return !ll.tokens.empty() && !ll.only_strings(); });
  }
  for (const auto& line : split_lines(code)) {
    std::string t = trim(line);
    if (!t.empty() && !t.starts_with("#")) return true;
  }
  return false;
}

bool is_parseable(std::string_view code) { return lex(code).ok; }

// ---------------------------------------------------------------------------

std::string to_string(CommentUsage v) {
  switch (v) {
    case CommentUsage::no_comment: return "no_comment";
    case CommentUsage::concise: return "concise";
    case CommentUsage::detailed: return "detailed";
  }
  return "?";
}
std::string to_string(Naming v) { return v == Naming::descriptive ? "descriptive" : "obscure"; }
std::string to_string(Generality v) { return v == Generality::hardcoded ? "hardcoded" : "generalized"; }

CommentUsage parse_comment_usage(std::string_view s) {
  if (s == "no_comment" || s == "no") return CommentUsage::no_comment;
  if (s == "concise") return CommentUsage::concise;
  if (s == "detailed") return CommentUsage::detailed;
  throw UsageError("unknown comment_usage value: " + std::string(s));
}
Naming parse_naming(std::string_view s) {
  if (s == "descriptive") return Naming::descriptive;
  if (s == "obscure") return Naming::obscure;
  throw UsageError("unknown naming value: " + std::string(s));
}
Generality parse_generality(std::string_view s) {
  if (s == "hardcoded") return Generality::hardcoded;
  if (s == "generalized" || s == "general") return Generality::generalized;
  throw UsageError("unknown generality value: " + std::string(s));
}

StyleTarget StyleTarget::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) colon = text.find('=');
  if (colon == std::string_view::npos) throw UsageError("style target must be axis:value: " + std::string(text));
  auto axis = text.substr(0, colon);
  auto value = text.substr(colon + 1);
  if (axis == "comment_usage" || axis == "comment") return StyleTarget(parse_comment_usage(value));
  if (axis == "naming") return StyleTarget(parse_naming(value));
  if (axis == "generality") return StyleTarget(parse_generality(value));
  throw UsageError("unknown style axis: " + std::string(axis));
}

std::string StyleTarget::axis_name() const {
  switch (axis_) {
    case Axis::comment_usage: return "comment_usage";
    case Axis::naming: return "naming";
    case Axis::generality: return "generality";
  }
  return "?";
}

std::string StyleTarget::value_name() const {
  switch (axis_) {
    case Axis::comment_usage: return style::to_string(static_cast<CommentUsage>(value_));
    case Axis::naming: return style::to_string(static_cast<Naming>(value_));
    case Axis::generality: return style::to_string(static_cast<Generality>(value_));
  }
  return "?";
}

bool StyleTarget::matches(const StyleProfile& p) const {
  switch (axis_) {
    case Axis::comment_usage: return static_cast<int>(p.comment_usage) == value_;
    case Axis::naming: return static_cast<int>(p.naming) == value_;
    case Axis::generality: return static_cast<int>(p.generality) == value_;
  }
  return false;
}

nlohmann::ordered_json to_json(const StyleProfile& p) {
  nlohmann::ordered_json j;
  j["comment_usage"] = to_string(p.comment_usage);
  j["naming"] = to_string(p.naming);
  j["generality"] = to_string(p.generality);
  return j;
}

StyleProfile profile_from_json(const nlohmann::json& j) {
  StyleProfile p;
  p.comment_usage = parse_comment_usage(j.at("comment_usage").get<std::string>());
  p.naming = parse_naming(j.at("naming").get<std::string>());
  p.generality = parse_generality(j.at("generality").get<std::string>());
  return p;
}

nlohmann::ordered_json to_json(const AuditReport& r) {
  nlohmann::ordered_json j;
  j["comment_line_ratio"] = r.comment_line_ratio;
  j["identifier_score"] = r.identifier_score;
  j["has_parameterized_function"] = r.has_parameterized_function;
  j["parse_degraded"] = r.parse_degraded;
  j["nonblank_lines"] = r.nonblank_lines;
  j["comment_lines"] = r.comment_lines;
  j["profile"] = to_json(r.profile);
  auto ev = nlohmann::ordered_json::array();
  for (const auto& e : r.evidence) {
    nlohmann::ordered_json x;
    x["measurement"] = e.measurement;
    x["line"] = e.line;
    x["value"] = e.value;
    x["detail"] = e.detail;
    ev.push_back(std::move(x));
  }
  j["evidence"] = std::move(ev);
  return j;
}

}  // namespace coinmath::style
