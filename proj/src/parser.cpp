#include "smellkit/python/parser.hpp"

#include <cassert>
#include <stdexcept>

namespace smellkit::py {

namespace {

struct ParserException {
  ParseError err;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, ParseTree& tree)
      : toks_(std::move(tokens)), tree_(tree) {}

  ModuleNode* parse() {
    auto* mod = tree_.make<ModuleNode>();
    std::size_t mark = i_;
    while (!peek().is(TokType::EndMarker)) {
      parse_statement(mod->body);
    }
    if (!mod->body.empty()) {
      mod->span = Span{mod->body.front()->span.start_line, mod->body.front()->span.start_col,
                       mod->body.back()->span.end_line, mod->body.back()->span.end_col,
                       mod->body.front()->span.begin, mod->body.back()->span.end};
    } else {
      mod->span = toks_[mark].span;
    }
    return mod;
  }

 private:
  std::vector<Token> toks_;
  ParseTree& tree_;
  std::size_t i_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t idx = std::min(i_ + ahead, toks_.size() - 1);
    return toks_[idx];
  }
  const Token& prev() const { return toks_[i_ - 1]; }
  const Token& advance() { return toks_[i_++]; }

  bool accept_op(std::string_view op) {
    if (peek().is_op(op)) {
      ++i_;
      return true;
    }
    return false;
  }
  bool accept_name(std::string_view name) {
    if (peek().is_name(name)) {
      ++i_;
      return true;
    }
    return false;
  }
  bool accept(TokType t) {
    if (peek().is(t)) {
      ++i_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    throw ParserException{ParseError{t.span.start_line, t.span.start_col, message}};
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }
  void expect(TokType t, const char* what) {
    if (!accept(t)) fail(std::string("expected ") + what);
  }
  std::string expect_ident() {
    if (peek().is(TokType::Name) && !is_python_keyword(peek().text)) {
      return std::string(advance().text);
    }
    fail("expected identifier");
  }

  void set_span(Node* node, std::size_t from_tok) {
    const Span& a = toks_[from_tok].span;
    const Span& b = prev().span;
    node->span = Span{a.start_line, a.start_col, b.end_line, b.end_col, a.begin, b.end};
  }
  static void end_from(Node* node, const std::vector<Node*>& body) {
    if (body.empty()) return;
    const Span& last = body.back()->span;
    node->span.end_line = last.end_line;
    node->span.end_col = last.end_col;
    node->span.end = last.end;
  }

  // --- statements ---

  void parse_statement(std::vector<Node*>& out) {
    const Token& t = peek();
    if (t.is(TokType::Newline) || t.is(TokType::Indent)) {
      fail("unexpected indent");
    }
    if (t.is(TokType::Dedent)) {
      fail("unexpected dedent");
    }
    if (t.is(TokType::Name)) {
      std::string_view kw = t.text;
      if (kw == "if") return out.push_back(parse_if());
      if (kw == "while") return out.push_back(parse_while());
      if (kw == "for") return out.push_back(parse_for(false));
      if (kw == "try") return out.push_back(parse_try());
      if (kw == "with") return out.push_back(parse_with(false));
      if (kw == "def") return out.push_back(parse_funcdef(false, {}));
      if (kw == "class") return out.push_back(parse_classdef({}));
      if (kw == "async") return out.push_back(parse_async());
      if (kw == "match") {
        if (Node* m = try_parse_match()) return out.push_back(m);
      }
    }
    if (t.is_op("@")) return out.push_back(parse_decorated());
    parse_simple_stmt_line(out);
  }

  Node* parse_async() {
    std::size_t mark = i_;
    advance();  // async
    if (peek().is_name("def")) {
      auto* fn = static_cast<FunctionDefNode*>(parse_funcdef(true, {}));
      set_start(fn, mark);
      return fn;
    }
    if (peek().is_name("for")) {
      Node* loop = parse_for(true);
      set_start(loop, mark);
      return loop;
    }
    if (peek().is_name("with")) {
      Node* w = parse_with(true);
      set_start(w, mark);
      return w;
    }
    fail("expected 'def', 'for' or 'with' after 'async'");
  }

  void set_start(Node* node, std::size_t from_tok) {
    const Span& a = toks_[from_tok].span;
    node->span.start_line = a.start_line;
    node->span.start_col = a.start_col;
    node->span.begin = a.begin;
  }

  Node* parse_decorated() {
    std::size_t mark = i_;
    std::vector<Node*> decorators;
    while (accept_op("@")) {
      decorators.push_back(parse_expression());
      expect(TokType::Newline, "newline after decorator");
    }
    Node* node;
    if (peek().is_name("def")) {
      node = parse_funcdef(false, decorators);
    } else if (peek().is_name("async")) {
      advance();
      if (!peek().is_name("def")) fail("expected 'def' after 'async'");
      node = parse_funcdef(true, decorators);
    } else if (peek().is_name("class")) {
      node = parse_classdef(decorators);
    } else {
      fail("expected function or class definition after decorators");
    }
    set_start(node, mark);
    return node;
  }

  Node* parse_funcdef(bool is_async, std::vector<Node*> decorators) {
    std::size_t mark = i_;
    advance();  // def
    auto* fn = tree_.make<FunctionDefNode>();
    fn->is_async = is_async;
    fn->decorators = std::move(decorators);
    fn->def_line = toks_[mark].span.start_line;
    fn->name = expect_ident();
    expect_op("(");
    fn->params = parse_params(/*allow_annotations=*/true, ")");
    expect_op(")");
    if (accept_op("->")) fn->returns = parse_expression();
    expect_op(":");
    parse_suite(fn->body);
    set_span(fn, mark);
    end_from(fn, fn->body);
    return fn;
  }

  std::vector<Param> parse_params(bool allow_annotations, std::string_view close) {
    std::vector<Param> params;
    bool kwonly = false;
    while (!peek().is_op(close) && !peek().is_op(":")) {
      if (accept_op("/")) {
        for (auto& p : params) {
          if (p.kind == ParamKind::Normal) p.kind = ParamKind::PosOnly;
        }
        if (!accept_op(",")) break;
        continue;
      }
      if (accept_op("*")) {
        if (peek().is(TokType::Name) && !is_python_keyword(peek().text)) {
          Param p;
          p.kind = ParamKind::VarArgs;
          p.name = expect_ident();
          if (allow_annotations && accept_op(":")) p.annotation = parse_expression();
          params.push_back(std::move(p));
        }
        kwonly = true;
        if (!accept_op(",")) break;
        continue;
      }
      if (accept_op("**")) {
        Param p;
        p.kind = ParamKind::KwArgs;
        p.name = expect_ident();
        if (allow_annotations && accept_op(":")) p.annotation = parse_expression();
        params.push_back(std::move(p));
        accept_op(",");
        break;
      }
      Param p;
      p.kind = kwonly ? ParamKind::KwOnly : ParamKind::Normal;
      p.name = expect_ident();
      if (allow_annotations && accept_op(":")) p.annotation = parse_expression();
      if (accept_op("=")) p.default_value = parse_expression();
      params.push_back(std::move(p));
      if (!accept_op(",")) break;
    }
    return params;
  }

  Node* parse_classdef(std::vector<Node*> decorators) {
    std::size_t mark = i_;
    advance();  // class
    auto* cls = tree_.make<ClassDefNode>();
    cls->decorators = std::move(decorators);
    cls->def_line = toks_[mark].span.start_line;
    cls->name = expect_ident();
    if (accept_op("(")) {
      while (!peek().is_op(")")) {
        if (accept_op("**")) {
          cls->keywords.emplace_back("", parse_expression());
        } else if (peek().is(TokType::Name) && !is_python_keyword(peek().text) &&
                   peek(1).is_op("=")) {
          std::string kw = expect_ident();
          expect_op("=");
          cls->keywords.emplace_back(std::move(kw), parse_expression());
        } else if (peek().is_op("*")) {
          std::size_t smark = i_;
          advance();
          auto* star = tree_.make<StarredNode>();
          star->value = parse_expression();
          set_span(star, smark);
          cls->bases.push_back(star);
        } else {
          cls->bases.push_back(parse_expression());
        }
        if (!accept_op(",")) break;
      }
      expect_op(")");
    }
    expect_op(":");
    parse_suite(cls->body);
    set_span(cls, mark);
    end_from(cls, cls->body);
    return cls;
  }

  Node* parse_if() {
    std::size_t mark = i_;
    advance();  // if / elif
    auto* node = tree_.make<IfNode>();
    node->test = parse_expression();
    expect_op(":");
    parse_suite(node->body);
    set_span(node, mark);
    end_from(node, node->body);
    if (peek().is_name("elif")) {
      Node* chained = parse_if();
      node->orelse.push_back(chained);
      end_from(node, node->orelse);
    } else if (peek().is_name("else")) {
      advance();
      expect_op(":");
      parse_suite(node->orelse);
      end_from(node, node->orelse);
    }
    return node;
  }

  Node* parse_while() {
    std::size_t mark = i_;
    advance();
    auto* node = tree_.make<WhileNode>();
    node->test = parse_expression();
    expect_op(":");
    parse_suite(node->body);
    set_span(node, mark);
    end_from(node, node->body);
    if (accept_name("else")) {
      expect_op(":");
      parse_suite(node->orelse);
      end_from(node, node->orelse);
    }
    return node;
  }

  Node* parse_for(bool is_async) {
    std::size_t mark = i_;
    advance();  // for
    auto* node = tree_.make<ForNode>();
    node->is_async = is_async;
    node->target = parse_target_list("in");
    if (!accept_name("in")) fail("expected 'in'");
    node->iter = parse_testlist();
    expect_op(":");
    parse_suite(node->body);
    set_span(node, mark);
    end_from(node, node->body);
    if (accept_name("else")) {
      expect_op(":");
      parse_suite(node->orelse);
      end_from(node, node->orelse);
    }
    return node;
  }

  Node* parse_try() {
    std::size_t mark = i_;
    advance();
    auto* node = tree_.make<TryNode>();
    expect_op(":");
    parse_suite(node->body);
    set_span(node, mark);
    end_from(node, node->body);
    while (peek().is_name("except")) {
      advance();
      accept_op("*");  // except* groups
      ExceptHandler handler;
      if (!peek().is_op(":")) {
        handler.type = parse_expression();
        if (accept_name("as")) handler.name = expect_ident();
      }
      expect_op(":");
      parse_suite(handler.body);
      end_from(node, handler.body);
      node->handlers.push_back(std::move(handler));
    }
    if (accept_name("else")) {
      expect_op(":");
      parse_suite(node->orelse);
      end_from(node, node->orelse);
    }
    if (accept_name("finally")) {
      expect_op(":");
      parse_suite(node->finalbody);
      end_from(node, node->finalbody);
    }
    if (node->handlers.empty() && node->finalbody.empty()) {
      fail("expected 'except' or 'finally' block");
    }
    return node;
  }

  Node* parse_with(bool is_async) {
    std::size_t mark = i_;
    advance();  // with
    auto* node = tree_.make<WithNode>();
    node->is_async = is_async;
    if (peek().is_op("(")) {
      // Try the parenthesized item-list form; fall back to expression.
      std::size_t save = i_;
      if (try_parse_paren_with_items(node->items)) {
        expect_op(":");
      } else {
        i_ = save;
        node->items.clear();
        parse_with_items(node->items);
        expect_op(":");
      }
    } else {
      parse_with_items(node->items);
      expect_op(":");
    }
    parse_suite(node->body);
    set_span(node, mark);
    end_from(node, node->body);
    return node;
  }

  void parse_with_items(std::vector<WithItem>& items) {
    do {
      WithItem item;
      item.context = parse_expression();
      if (accept_name("as")) {
        item.alias = parse_target_atom();
        mark_target(item.alias);
      }
      items.push_back(item);
    } while (accept_op(","));
  }

  bool try_parse_paren_with_items(std::vector<WithItem>& items) {
    try {
      expect_op("(");
      do {
        if (peek().is_op(")")) break;
        WithItem item;
        item.context = parse_expression();
        if (accept_name("as")) {
          item.alias = parse_target_atom();
          mark_target(item.alias);
        }
        items.push_back(item);
      } while (accept_op(","));
      expect_op(")");
      return peek().is_op(":");
    } catch (const ParserException&) {
      return false;
    }
  }

  Node* try_parse_match() {
    std::size_t save = i_;
    try {
      std::size_t mark = i_;
      advance();  // match
      auto* node = tree_.make<MatchNode>();
      node->subject = parse_testlist();
      expect_op(":");
      expect(TokType::Newline, "newline");
      expect(TokType::Indent, "indented block");
      if (!peek().is_name("case")) fail("expected 'case'");
      while (peek().is_name("case")) {
        advance();
        MatchCase mcase;
        mcase.pattern = parse_testlist();
        if (accept_name("as")) expect_ident();
        if (accept_name("if")) mcase.guard = parse_expression();
        expect_op(":");
        parse_suite(mcase.body);
        end_from(node, mcase.body);
        node->cases.push_back(std::move(mcase));
      }
      expect(TokType::Dedent, "dedent");
      set_span(node, mark);
      if (!node->cases.empty()) end_from(node, node->cases.back().body);
      return node;
    } catch (const ParserException&) {
      i_ = save;
      return nullptr;
    }
  }

  void parse_suite(std::vector<Node*>& body) {
    if (accept(TokType::Newline)) {
      expect(TokType::Indent, "indented block");
      while (!peek().is(TokType::Dedent) && !peek().is(TokType::EndMarker)) {
        parse_statement(body);
      }
      expect(TokType::Dedent, "dedent");
      if (body.empty()) fail("expected statement in block");
      return;
    }
    parse_simple_stmt_line(body);
  }

  void parse_simple_stmt_line(std::vector<Node*>& out) {
    out.push_back(parse_simple_stmt());
    while (accept_op(";")) {
      if (peek().is(TokType::Newline) || peek().is(TokType::EndMarker)) break;
      out.push_back(parse_simple_stmt());
    }
    if (!accept(TokType::Newline)) {
      if (!peek().is(TokType::EndMarker)) fail("expected end of statement");
    }
  }

  Node* parse_simple_stmt() {
    const Token& t = peek();
    std::size_t mark = i_;
    if (t.is(TokType::Name)) {
      std::string_view kw = t.text;
      if (kw == "return") {
        advance();
        auto* node = tree_.make<ReturnNode>();
        if (!at_stmt_end()) node->value = parse_testlist();
        set_span(node, mark);
        return node;
      }
      if (kw == "pass") {
        advance();
        auto* node = tree_.make<PassNode>();
        set_span(node, mark);
        return node;
      }
      if (kw == "break") {
        advance();
        auto* node = tree_.make<BreakNode>();
        set_span(node, mark);
        return node;
      }
      if (kw == "continue") {
        advance();
        auto* node = tree_.make<ContinueNode>();
        set_span(node, mark);
        return node;
      }
      if (kw == "import") {
        advance();
        parse_import_tail();
        auto* node = tree_.make<ImportNode>();
        set_span(node, mark);
        return node;
      }
      if (kw == "from") {
        advance();
        parse_import_tail();
        auto* node = tree_.make<ImportFromNode>();
        set_span(node, mark);
        return node;
      }
      if (kw == "global" || kw == "nonlocal") {
        advance();
        std::vector<std::string> names;
        do {
          names.push_back(expect_ident());
        } while (accept_op(","));
        if (kw == "global") {
          auto* node = tree_.make<GlobalNode>();
          node->names = std::move(names);
          set_span(node, mark);
          return node;
        }
        auto* node = tree_.make<NonlocalNode>();
        node->names = std::move(names);
        set_span(node, mark);
        return node;
      }
      if (kw == "del") {
        advance();
        auto* node = tree_.make<DeleteNode>();
        do {
          Node* target = parse_target_atom();
          mark_target(target);
          node->targets.push_back(target);
        } while (accept_op(","));
        set_span(node, mark);
        return node;
      }
      if (kw == "assert") {
        advance();
        auto* node = tree_.make<AssertNode>();
        node->test = parse_expression();
        if (accept_op(",")) node->message = parse_expression();
        set_span(node, mark);
        return node;
      }
      if (kw == "raise") {
        advance();
        auto* node = tree_.make<RaiseNode>();
        if (!at_stmt_end()) {
          node->exc = parse_expression();
          if (accept_name("from")) node->cause = parse_expression();
        }
        set_span(node, mark);
        return node;
      }
      if (kw == "yield") {
        auto* node = tree_.make<ExprStmtNode>();
        node->value = parse_yield();
        set_span(node, mark);
        return node;
      }
    }
    return parse_expr_statement();
  }

  bool at_stmt_end() const {
    return peek().is(TokType::Newline) || peek().is(TokType::EndMarker) || peek().is_op(";");
  }

  void parse_import_tail() {
    // Module paths and aliases carry no entities; consume to end of statement.
    while (!at_stmt_end()) advance();
  }

  Node* parse_expr_statement() {
    std::size_t mark = i_;
    Node* first = parse_testlist();
    if (accept_op(":")) {
      auto* node = tree_.make<AnnAssignNode>();
      node->target = first;
      mark_target(first);
      node->annotation = parse_expression();
      if (accept_op("=")) node->value = parse_testlist();
      set_span(node, mark);
      return node;
    }
    static const std::string_view aug_ops[] = {"+=", "-=", "*=",  "/=",  "//=", "%=",
                                               "@=", "&=", "|=",  "^=",  ">>=", "<<=",
                                               "**="};
    for (auto op : aug_ops) {
      if (peek().is_op(op)) {
        advance();
        auto* node = tree_.make<AugAssignNode>();
        node->target = first;
        mark_target(first);
        node->op = std::string(op);
        node->value = parse_testlist();
        set_span(node, mark);
        return node;
      }
    }
    if (peek().is_op("=")) {
      auto* node = tree_.make<AssignNode>();
      node->targets.push_back(first);
      Node* value = first;
      while (accept_op("=")) {
        value = parse_testlist();
        node->targets.push_back(value);
      }
      node->targets.pop_back();  // last one is the value
      node->value = value;
      for (Node* target : node->targets) mark_target(target);
      set_span(node, mark);
      return node;
    }
    auto* node = tree_.make<ExprStmtNode>();
    node->value = first;
    set_span(node, mark);
    return node;
  }

  // --- targets ---

  Node* parse_target_list(std::string_view stop_kw) {
    std::size_t mark = i_;
    std::vector<Node*> items;
    items.push_back(parse_target_atom());
    bool comma = false;
    while (accept_op(",")) {
      comma = true;
      if (peek().is_name(stop_kw) || peek().is_op(":") || peek().is(TokType::Newline)) break;
      items.push_back(parse_target_atom());
    }
    Node* result;
    if (items.size() == 1 && !comma) {
      result = items[0];
    } else {
      auto* tuple = tree_.make<TupleExprNode>();
      tuple->elements = std::move(items);
      set_span(tuple, mark);
      result = tuple;
    }
    mark_target(result);
    return result;
  }

  Node* parse_target_atom() {
    std::size_t mark = i_;
    if (accept_op("*")) {
      auto* star = tree_.make<StarredNode>();
      star->value = parse_target_atom();
      set_span(star, mark);
      return star;
    }
    // NAME, attributeref, subscription, or (targetlist)/[targetlist]
    Node* node = parse_postfix();
    (void)mark;
    return node;
  }

  void mark_target(Node* node) {
    if (!node) return;
    node->is_target = true;
    switch (node->kind) {
      case NodeKind::TupleExpr:
        for (Node* el : static_cast<TupleExprNode*>(node)->elements) mark_target(el);
        break;
      case NodeKind::ListExpr:
        for (Node* el : static_cast<ListExprNode*>(node)->elements) mark_target(el);
        break;
      case NodeKind::Starred:
        mark_target(static_cast<StarredNode*>(node)->value);
        break;
      default:
        break;
    }
  }

  // --- expressions ---

  Node* parse_testlist() {
    std::size_t mark = i_;
    Node* first = parse_star_or_expression();
    if (!peek().is_op(",")) return first;
    auto* tuple = tree_.make<TupleExprNode>();
    tuple->elements.push_back(first);
    while (accept_op(",")) {
      if (stops_expression()) break;
      tuple->elements.push_back(parse_star_or_expression());
    }
    set_span(tuple, mark);
    return tuple;
  }

  bool stops_expression() const {
    const Token& t = peek();
    if (t.is(TokType::Newline) || t.is(TokType::EndMarker)) return true;
    if (t.is(TokType::Op)) {
      return t.text == ")" || t.text == "]" || t.text == "}" || t.text == ":" ||
             t.text == "=" || t.text == ";";
    }
    if (t.is(TokType::Name)) {
      return t.text == "in" || t.text == "for" || t.text == "if" || t.text == "as";
    }
    return false;
  }

  Node* parse_star_or_expression() {
    std::size_t mark = i_;
    if (accept_op("*")) {
      auto* star = tree_.make<StarredNode>();
      star->value = parse_or_test();
      set_span(star, mark);
      return star;
    }
    return parse_expression();
  }

  // Full conditional expression, lambda, walrus superset, yield.
  Node* parse_expression() {
    if (peek().is_name("lambda")) return parse_lambda();
    if (peek().is_name("yield")) return parse_yield();
    std::size_t mark = i_;
    Node* node = parse_or_test();
    if (peek().is_name("if")) {
      // conditional expression
      std::size_t save = i_;
      advance();
      Node* test = parse_or_test();
      if (!accept_name("else")) {
        // comprehension filter context reaches here; rewind
        i_ = save;
        return maybe_walrus(node, mark);
      }
      auto* cond = tree_.make<IfExpNode>();
      cond->body = node;
      cond->test = test;
      cond->orelse = parse_expression();
      set_span(cond, mark);
      return cond;
    }
    return maybe_walrus(node, mark);
  }

  Node* maybe_walrus(Node* node, std::size_t mark) {
    if (peek().is_op(":=") && node->kind == NodeKind::Name) {
      advance();
      auto* walrus = tree_.make<NamedExprNode>();
      walrus->target = node;
      walrus->value = parse_expression();
      set_span(walrus, mark);
      return walrus;
    }
    return node;
  }

  Node* parse_lambda() {
    std::size_t mark = i_;
    advance();  // lambda
    auto* node = tree_.make<LambdaNode>();
    node->params = parse_params(/*allow_annotations=*/false, ":");
    expect_op(":");
    node->body = parse_expression();
    set_span(node, mark);
    return node;
  }

  Node* parse_yield() {
    std::size_t mark = i_;
    advance();  // yield
    if (accept_name("from")) {
      auto* node = tree_.make<YieldFromNode>();
      node->value = parse_expression();
      set_span(node, mark);
      return node;
    }
    auto* node = tree_.make<YieldNode>();
    if (!at_stmt_end() && !peek().is_op(")") && !peek().is_op("]") && !peek().is_op("}")) {
      node->value = parse_testlist();
    }
    set_span(node, mark);
    return node;
  }

  Node* parse_or_test() {
    std::size_t mark = i_;
    Node* node = parse_and_test();
    if (!peek().is_name("or")) return node;
    auto* bop = tree_.make<BoolOpNode>();
    bop->op = "or";
    bop->values.push_back(node);
    while (accept_name("or")) bop->values.push_back(parse_and_test());
    set_span(bop, mark);
    return bop;
  }

  Node* parse_and_test() {
    std::size_t mark = i_;
    Node* node = parse_not_test();
    if (!peek().is_name("and")) return node;
    auto* bop = tree_.make<BoolOpNode>();
    bop->op = "and";
    bop->values.push_back(node);
    while (accept_name("and")) bop->values.push_back(parse_not_test());
    set_span(bop, mark);
    return bop;
  }

  Node* parse_not_test() {
    std::size_t mark = i_;
    if (accept_name("not")) {
      auto* node = tree_.make<UnaryOpNode>();
      node->op = "not";
      node->operand = parse_not_test();
      set_span(node, mark);
      return node;
    }
    return parse_comparison();
  }

  Node* parse_comparison() {
    std::size_t mark = i_;
    Node* node = parse_bit_or();
    CompareNode* cmp = nullptr;
    while (true) {
      std::string op;
      if (peek().is_op("<") || peek().is_op(">") || peek().is_op("==") || peek().is_op("!=") ||
          peek().is_op("<=") || peek().is_op(">=")) {
        op = std::string(advance().text);
      } else if (peek().is_name("in")) {
        advance();
        op = "in";
      } else if (peek().is_name("not") && peek(1).is_name("in")) {
        advance();
        advance();
        op = "not in";
      } else if (peek().is_name("is")) {
        advance();
        op = accept_name("not") ? "is not" : "is";
      } else {
        break;
      }
      if (!cmp) {
        cmp = tree_.make<CompareNode>();
        cmp->left = node;
      }
      cmp->ops.push_back(op);
      cmp->comparators.push_back(parse_bit_or());
    }
    if (!cmp) return node;
    set_span(cmp, mark);
    return cmp;
  }

  Node* parse_bit_or() { return parse_binop_level(0); }

  // Binary operator levels from loosest to tightest.
  Node* parse_binop_level(int level) {
    static const std::vector<std::vector<std::string_view>> levels = {
        {"|"}, {"^"}, {"&"}, {"<<", ">>"}, {"+", "-"}, {"*", "/", "//", "%", "@"}};
    if (level >= static_cast<int>(levels.size())) return parse_factor();
    std::size_t mark = i_;
    Node* node = parse_binop_level(level + 1);
    while (true) {
      bool matched = false;
      for (auto op : levels[level]) {
        if (peek().is_op(op)) {
          advance();
          auto* bin = tree_.make<BinOpNode>();
          bin->left = node;
          bin->op = std::string(op);
          bin->right = parse_binop_level(level + 1);
          set_span(bin, mark);
          node = bin;
          matched = true;
          break;
        }
      }
      if (!matched) break;
    }
    return node;
  }

  Node* parse_factor() {
    std::size_t mark = i_;
    if (peek().is_op("+") || peek().is_op("-") || peek().is_op("~")) {
      auto* node = tree_.make<UnaryOpNode>();
      node->op = std::string(advance().text);
      node->operand = parse_factor();
      set_span(node, mark);
      return node;
    }
    return parse_power();
  }

  Node* parse_power() {
    std::size_t mark = i_;
    Node* node = parse_awaited();
    if (accept_op("**")) {
      auto* bin = tree_.make<BinOpNode>();
      bin->left = node;
      bin->op = "**";
      bin->right = parse_factor();
      set_span(bin, mark);
      return bin;
    }
    return node;
  }

  Node* parse_awaited() {
    std::size_t mark = i_;
    if (accept_name("await")) {
      auto* node = tree_.make<AwaitNode>();
      node->value = parse_awaited();
      set_span(node, mark);
      return node;
    }
    (void)mark;
    return parse_postfix();
  }

  Node* parse_postfix() {
    std::size_t mark = i_;
    Node* node = parse_atom();
    while (true) {
      if (peek().is_op("(")) {
        advance();
        auto* call = tree_.make<CallNode>();
        call->func = node;
        parse_call_args(call);
        expect_op(")");
        set_span(call, mark);
        node = call;
      } else if (peek().is_op("[")) {
        advance();
        auto* sub = tree_.make<SubscriptNode>();
        sub->value = node;
        sub->index = parse_subscript_list();
        expect_op("]");
        set_span(sub, mark);
        node = sub;
      } else if (peek().is_op(".")) {
        advance();
        auto* attr = tree_.make<AttributeNode>();
        attr->value = node;
        attr->attr = expect_ident();
        set_span(attr, mark);
        node = attr;
      } else {
        break;
      }
    }
    return node;
  }

  void parse_call_args(CallNode* call) {
    bool first = true;
    while (!peek().is_op(")")) {
      if (accept_op("*")) {
        auto* star = tree_.make<StarredNode>();
        std::size_t smark = i_ - 1;
        star->value = parse_expression();
        set_span(star, smark);
        call->args.push_back(star);
      } else if (accept_op("**")) {
        call->keywords.emplace_back("", parse_expression());
      } else if (peek().is(TokType::Name) && !is_python_keyword(peek().text) &&
                 peek(1).is_op("=")) {
        std::string kw = expect_ident();
        expect_op("=");
        call->keywords.emplace_back(std::move(kw), parse_expression());
      } else {
        std::size_t emark = i_;
        Node* arg = parse_expression();
        if (first && peek().is_name("for")) {
          // generator expression argument
          auto* gen = tree_.make<ComprehensionNode>(NodeKind::GeneratorExp);
          gen->element = arg;
          parse_comp_clauses(gen->clauses);
          set_span(gen, emark);
          call->args.push_back(gen);
          break;
        }
        call->args.push_back(arg);
      }
      first = false;
      if (!accept_op(",")) break;
    }
  }

  Node* parse_subscript_list() {
    std::size_t mark = i_;
    std::vector<Node*> items;
    items.push_back(parse_subscript_item());
    bool comma = false;
    while (accept_op(",")) {
      comma = true;
      if (peek().is_op("]")) break;
      items.push_back(parse_subscript_item());
    }
    if (items.size() == 1 && !comma) return items[0];
    auto* tuple = tree_.make<TupleExprNode>();
    tuple->elements = std::move(items);
    set_span(tuple, mark);
    return tuple;
  }

  Node* parse_subscript_item() {
    std::size_t mark = i_;
    Node* lower = nullptr;
    if (!peek().is_op(":")) {
      lower = parse_star_or_expression();
      if (!peek().is_op(":")) return lower;
    }
    expect_op(":");
    auto* slice = tree_.make<SliceNode>();
    slice->lower = lower;
    if (!peek().is_op("]") && !peek().is_op(",") && !peek().is_op(":")) {
      slice->upper = parse_expression();
    }
    if (accept_op(":")) {
      if (!peek().is_op("]") && !peek().is_op(",")) slice->step = parse_expression();
    }
    set_span(slice, mark);
    return slice;
  }

  void parse_comp_clauses(std::vector<CompClause>& clauses) {
    while (true) {
      bool is_async = false;
      if (peek().is_name("async") && peek(1).is_name("for")) {
        advance();
        is_async = true;
      }
      if (!accept_name("for")) break;
      CompClause clause;
      clause.is_async = is_async;
      clause.target = parse_target_list("in");
      if (!accept_name("in")) fail("expected 'in'");
      clause.iter = parse_or_test();
      while (peek().is_name("if")) {
        // A comprehension 'if' has no matching 'else'; a ternary in the
        // element position is handled before clauses are parsed.
        advance();
        clause.ifs.push_back(parse_or_test());
      }
      clauses.push_back(std::move(clause));
    }
  }

  Node* parse_atom() {
    const Token& t = peek();
    std::size_t mark = i_;

    if (t.is(TokType::Number)) {
      advance();
      auto* node = tree_.make<ConstantNode>();
      node->ctype = ConstantNode::Type::Number;
      set_span(node, mark);
      return node;
    }
    if (t.is(TokType::String)) {
      while (peek().is(TokType::String)) advance();  // implicit concatenation
      auto* node = tree_.make<ConstantNode>();
      node->ctype = ConstantNode::Type::String;
      set_span(node, mark);
      return node;
    }
    if (t.is(TokType::Name)) {
      if (t.text == "lambda") return parse_lambda();
      if (t.text == "True" || t.text == "False") {
        advance();
        auto* node = tree_.make<ConstantNode>();
        node->ctype = ConstantNode::Type::Bool;
        set_span(node, mark);
        return node;
      }
      if (t.text == "None") {
        advance();
        auto* node = tree_.make<ConstantNode>();
        node->ctype = ConstantNode::Type::None;
        set_span(node, mark);
        return node;
      }
      if (t.text == "not") return parse_not_test();
      if (t.text == "await") return parse_awaited();
      if (is_python_keyword(t.text)) fail("unexpected keyword '" + std::string(t.text) + "'");
      advance();
      auto* node = tree_.make<NameNode>();
      node->id = std::string(t.text);
      set_span(node, mark);
      return node;
    }
    if (t.is_op("...")) {
      advance();
      auto* node = tree_.make<ConstantNode>();
      node->ctype = ConstantNode::Type::Ellipsis;
      set_span(node, mark);
      return node;
    }
    if (t.is_op("(")) return parse_paren_atom();
    if (t.is_op("[")) return parse_bracket_atom();
    if (t.is_op("{")) return parse_brace_atom();
    fail("unexpected token '" + std::string(t.text) + "'");
  }

  Node* parse_paren_atom() {
    std::size_t mark = i_;
    expect_op("(");
    if (accept_op(")")) {
      auto* tuple = tree_.make<TupleExprNode>();
      tuple->parenthesized = true;
      set_span(tuple, mark);
      return tuple;
    }
    if (peek().is_name("yield")) {
      Node* node = parse_yield();
      expect_op(")");
      return node;
    }
    Node* first = parse_star_or_expression();
    if (peek().is_name("for") || (peek().is_name("async") && peek(1).is_name("for"))) {
      auto* gen = tree_.make<ComprehensionNode>(NodeKind::GeneratorExp);
      gen->element = first;
      parse_comp_clauses(gen->clauses);
      expect_op(")");
      set_span(gen, mark);  // span includes the parentheses
      return gen;
    }
    if (peek().is_op(",")) {
      auto* tuple = tree_.make<TupleExprNode>();
      tuple->parenthesized = true;
      tuple->elements.push_back(first);
      while (accept_op(",")) {
        if (peek().is_op(")")) break;
        tuple->elements.push_back(parse_star_or_expression());
      }
      expect_op(")");
      set_span(tuple, mark);
      return tuple;
    }
    expect_op(")");
    // Plain grouping: the inner node keeps its own span.
    return first;
  }

  Node* parse_bracket_atom() {
    std::size_t mark = i_;
    expect_op("[");
    if (accept_op("]")) {
      auto* list = tree_.make<ListExprNode>();
      set_span(list, mark);
      return list;
    }
    Node* first = parse_star_or_expression();
    if (peek().is_name("for") || (peek().is_name("async") && peek(1).is_name("for"))) {
      auto* comp = tree_.make<ComprehensionNode>(NodeKind::ListComp);
      comp->element = first;
      parse_comp_clauses(comp->clauses);
      expect_op("]");
      set_span(comp, mark);
      return comp;
    }
    auto* list = tree_.make<ListExprNode>();
    list->elements.push_back(first);
    while (accept_op(",")) {
      if (peek().is_op("]")) break;
      list->elements.push_back(parse_star_or_expression());
    }
    expect_op("]");
    set_span(list, mark);
    return list;
  }

  Node* parse_brace_atom() {
    std::size_t mark = i_;
    expect_op("{");
    if (accept_op("}")) {
      auto* dict = tree_.make<DictExprNode>();
      set_span(dict, mark);
      return dict;
    }
    if (accept_op("**")) {
      auto* dict = tree_.make<DictExprNode>();
      dict->keys.push_back(nullptr);
      dict->values.push_back(parse_or_test());
      parse_dict_rest(dict);
      expect_op("}");
      set_span(dict, mark);
      return dict;
    }
    Node* first = parse_star_or_expression();
    if (accept_op(":")) {
      Node* value = parse_expression();
      if (peek().is_name("for") || (peek().is_name("async") && peek(1).is_name("for"))) {
        auto* comp = tree_.make<ComprehensionNode>(NodeKind::DictComp);
        comp->key = first;
        comp->element = value;
        parse_comp_clauses(comp->clauses);
        expect_op("}");
        set_span(comp, mark);
        return comp;
      }
      auto* dict = tree_.make<DictExprNode>();
      dict->keys.push_back(first);
      dict->values.push_back(value);
      parse_dict_rest(dict);
      expect_op("}");
      set_span(dict, mark);
      return dict;
    }
    if (peek().is_name("for") || (peek().is_name("async") && peek(1).is_name("for"))) {
      auto* comp = tree_.make<ComprehensionNode>(NodeKind::SetComp);
      comp->element = first;
      parse_comp_clauses(comp->clauses);
      expect_op("}");
      set_span(comp, mark);
      return comp;
    }
    auto* set = tree_.make<SetExprNode>();
    set->elements.push_back(first);
    while (accept_op(",")) {
      if (peek().is_op("}")) break;
      set->elements.push_back(parse_star_or_expression());
    }
    expect_op("}");
    set_span(set, mark);
    return set;
  }

  void parse_dict_rest(DictExprNode* dict) {
    while (accept_op(",")) {
      if (peek().is_op("}")) break;
      if (accept_op("**")) {
        dict->keys.push_back(nullptr);
        dict->values.push_back(parse_or_test());
        continue;
      }
      Node* key = parse_expression();
      expect_op(":");
      dict->keys.push_back(key);
      dict->values.push_back(parse_expression());
    }
  }
};

}  // namespace

ParseOutcome parse_module(std::string_view text) {
  TokenizeResult lexed = tokenize(text);
  if (!lexed.ok()) {
    const TokenizeError& e = lexed.errors.front();
    return ParseOutcome{nullptr, ParseError{e.line, e.col, e.message}};
  }
  auto tree = std::make_shared<ParseTree>();
  try {
    Parser parser(std::move(lexed.tokens), *tree);
    tree->module = parser.parse();
  } catch (const ParserException& ex) {
    return ParseOutcome{nullptr, ex.err};
  }
  return ParseOutcome{tree, std::nullopt};
}

}  // namespace smellkit::py
