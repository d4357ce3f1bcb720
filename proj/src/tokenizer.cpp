#include "smellkit/python/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace smellkit::py {

namespace {

const std::set<std::string_view> kKeywords = {
    "False", "None",  "True",    "and",   "as",     "assert", "async",
    "await", "break", "class",   "continue", "def", "del",    "elif",
    "else",  "except", "finally", "for",   "from",   "global", "if",
    "import", "in",   "is",      "lambda", "nonlocal", "not",  "or",
    "pass",  "raise", "return",  "try",   "while",  "with",   "yield"};

// Multi-character operators, longest first within each leading char.
const std::array<std::string_view, 25> kMultiOps = {
    "**=", "//=", ">>=", "<<=", "...", "!=", ">=", "<=", "==",
    "->",  ":=",  "+=",  "-=",  "*=",  "/=", "%=", "@=", "&=",
    "|=",  "^=",  ">>",  "<<",  "**",  "//", ""};

const std::string_view kSingleOps = "+-*/%@&|^~<>()[]{},:.;=";

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
bool is_ident_cont(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view s) {
  if (s.size() > 2) return false;
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::set<std::string_view> prefixes = {"r",  "b",  "u",  "f",
                                                      "rb", "br", "fr", "rf"};
  return prefixes.count(lower) > 0;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  TokenizeResult run() {
    indents_.push_back(0);
    while (pos_ < text_.size() && result_.ok()) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) continue;  // blank/comment line consumed
      }
      scan_line_tokens();
    }
    finish();
    return std::move(result_);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;  // 1-based, Unicode scalars
  int depth_ = 0;  // open bracket depth
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<int> indents_;
  TokenizeResult result_;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (pos_ >= text_.size()) return;
    unsigned char c = static_cast<unsigned char>(text_[pos_]);
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((c & 0xc0) != 0x80) {
      ++col_;  // count scalar starts only
    }
    ++pos_;
  }

  void error(std::string message) {
    result_.errors.push_back({line_, col_, std::move(message)});
  }

  void emit(TokType type, std::size_t begin, int bline, int bcol) {
    Token t;
    t.type = type;
    t.text = text_.substr(begin, pos_ - begin);
    t.span = Span{bline, bcol, line_, col_, begin, pos_};
    result_.tokens.push_back(t);
    if (type != TokType::Newline && type != TokType::Indent && type != TokType::Dedent) {
      line_has_tokens_ = true;
    }
  }

  // Measures leading whitespace and emits INDENT/DEDENT. Returns false if the
  // line was blank or comment-only and has been consumed.
  bool handle_indentation() {
    std::size_t start = pos_;
    int width = 0;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ') {
        ++width;
        advance();
      } else if (c == '\t') {
        width = (width / 8 + 1) * 8;
        advance();
      } else if (c == '\f') {
        advance();
      } else {
        break;
      }
    }
    char c = peek();
    if (c == '\0') return false;
    if (c == '\n' || c == '\r' || c == '#') {
      skip_to_eol_and_newline(/*logical=*/false);
      return false;
    }
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      Token t;
      t.type = TokType::Indent;
      t.text = text_.substr(start, pos_ - start);
      t.span = Span{line_, 1, line_, col_, start, pos_};
      result_.tokens.push_back(t);
    } else if (width < indents_.back()) {
      while (indents_.size() > 1 && indents_.back() > width) {
        indents_.pop_back();
        Token t;
        t.type = TokType::Dedent;
        t.text = std::string_view();
        t.span = Span{line_, col_, line_, col_, pos_, pos_};
        result_.tokens.push_back(t);
      }
      if (indents_.back() != width) {
        error("unindent does not match any outer indentation level");
        return false;
      }
    }
    return true;
  }

  void skip_to_eol_and_newline(bool logical) {
    while (pos_ < text_.size() && text_[pos_] != '\n') advance();
    if (pos_ < text_.size()) advance();  // consume '\n'
    at_line_start_ = true;
    if (logical) line_has_tokens_ = false;
  }

  // Scans tokens until the end of the current logical line (or EOF).
  void scan_line_tokens() {
    while (pos_ < text_.size() && result_.ok()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\f') {
        advance();
        continue;
      }
      if (c == '\r') {
        advance();
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        if (depth_ > 0) {
          advance();  // implicit continuation inside brackets
          continue;
        }
        std::size_t begin = pos_;
        int bline = line_;
        int bcol = col_;
        advance();
        if (line_has_tokens_) {
          emit(TokType::Newline, begin, bline, bcol);
          line_has_tokens_ = false;
        }
        at_line_start_ = true;
        return;
      }
      if (c == '\\') {
        if (peek(1) == '\n' || (peek(1) == '\r' && peek(2) == '\n')) {
          advance();
          if (peek() == '\r') advance();
          advance();
          continue;
        }
        error("unexpected character after line continuation character");
        return;
      }
      scan_token();
    }
  }

  void scan_token() {
    std::size_t begin = pos_;
    int bline = line_;
    int bcol = col_;
    unsigned char c = static_cast<unsigned char>(peek());

    if (is_ident_start(c)) {
      while (pos_ < text_.size() && is_ident_cont(static_cast<unsigned char>(peek()))) advance();
      std::string_view word = text_.substr(begin, pos_ - begin);
      if (is_string_prefix(word) && (peek() == '\'' || peek() == '"')) {
        scan_string(begin, bline, bcol);
        return;
      }
      emit(TokType::Name, begin, bline, bcol);
      return;
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      scan_number();
      emit(TokType::Number, begin, bline, bcol);
      return;
    }
    if (c == '\'' || c == '"') {
      scan_string(begin, bline, bcol);
      return;
    }

    // operators
    std::string_view rest = text_.substr(pos_);
    for (std::string_view op : kMultiOps) {
      if (op.empty()) break;
      if (rest.substr(0, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        emit(TokType::Op, begin, bline, bcol);
        return;
      }
    }
    if (kSingleOps.find(static_cast<char>(c)) != std::string_view::npos) {
      if (c == '(' || c == '[' || c == '{') ++depth_;
      if (c == ')' || c == ']' || c == '}') depth_ = std::max(0, depth_ - 1);
      advance();
      emit(TokType::Op, begin, bline, bcol);
      return;
    }
    if (c == '!') {  // lone '!' (not '!=') is invalid
      error("invalid syntax: '!'");
      advance();
      return;
    }
    error(std::string("invalid character '") + static_cast<char>(c) + "'");
    advance();
  }

  void scan_number() {
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' ||
                          peek(1) == 'O' || peek(1) == 'b' || peek(1) == 'B')) {
      advance();
      advance();
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      return;
    }
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
    if (peek() == '.') {
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      if (std::isdigit(static_cast<unsigned char>(peek(1))) ||
          ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2))))) {
        advance();
        if (peek() == '+' || peek() == '-') advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
    }
    if (peek() == 'j' || peek() == 'J') advance();
  }

  // pos_ sits at the opening quote; begin/bline/bcol may include a prefix.
  void scan_string(std::size_t begin, int bline, int bcol) {
    char quote = peek();
    bool triple = peek(1) == quote && peek(2) == quote;
    advance();
    if (triple) {
      advance();
      advance();
    }
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '\\') {
        advance();
        if (pos_ < text_.size()) advance();
        continue;
      }
      if (c == quote) {
        if (!triple) {
          advance();
          emit(TokType::String, begin, bline, bcol);
          return;
        }
        if (peek(1) == quote && peek(2) == quote) {
          advance();
          advance();
          advance();
          emit(TokType::String, begin, bline, bcol);
          return;
        }
        advance();
        continue;
      }
      if (c == '\n' && !triple) {
        error("unterminated string literal");
        return;
      }
      advance();
    }
    error(triple ? "unterminated triple-quoted string literal" : "unterminated string literal");
  }

  void finish() {
    if (!result_.ok()) return;
    if (depth_ > 0) {
      error("unexpected end of file inside brackets");
      return;
    }
    if (line_has_tokens_) {
      Token t;
      t.type = TokType::Newline;
      t.text = std::string_view();
      t.span = Span{line_, col_, line_, col_, pos_, pos_};
      result_.tokens.push_back(t);
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      Token t;
      t.type = TokType::Dedent;
      t.text = std::string_view();
      t.span = Span{line_, col_, line_, col_, pos_, pos_};
      result_.tokens.push_back(t);
    }
    Token t;
    t.type = TokType::EndMarker;
    t.text = std::string_view();
    t.span = Span{line_, col_, line_, col_, pos_, pos_};
    result_.tokens.push_back(t);
  }
};

}  // namespace

bool is_python_keyword(std::string_view name) { return kKeywords.count(name) > 0; }

TokenizeResult tokenize(std::string_view text) { return Tokenizer(text).run(); }

}  // namespace smellkit::py
