#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smellkit/span.hpp"

namespace smellkit::py {

enum class NodeKind {
  Module,
  // statements
  FunctionDef,
  ClassDef,
  Return,
  Delete,
  Assign,
  AugAssign,
  AnnAssign,
  For,
  While,
  If,
  With,
  Raise,
  Try,
  Assert,
  Import,
  ImportFrom,
  Global,
  Nonlocal,
  ExprStmt,
  Pass,
  Break,
  Continue,
  Match,
  // expressions
  BoolOp,
  BinOp,
  UnaryOp,
  Lambda,
  IfExp,
  DictExpr,
  SetExpr,
  ListComp,
  SetComp,
  DictComp,
  GeneratorExp,
  Await,
  Yield,
  YieldFrom,
  Compare,
  Call,
  Constant,
  Attribute,
  Subscript,
  Starred,
  Name,
  ListExpr,
  TupleExpr,
  Slice,
  NamedExpr,
};

struct Node {
  NodeKind kind;
  Span span;
  // Set on expressions that appear in a binding position (assignment target,
  // loop target, with/except alias, del operand). Container displays in
  // target position are patterns, not value constructions.
  bool is_target = false;

  explicit Node(NodeKind k) : kind(k) {}
  virtual ~Node() = default;
};

enum class ParamKind { PosOnly, Normal, VarArgs, KwOnly, KwArgs };

struct Param {
  std::string name;
  ParamKind kind = ParamKind::Normal;
  Node* annotation = nullptr;
  Node* default_value = nullptr;
};

struct ModuleNode : Node {
  ModuleNode() : Node(NodeKind::Module) {}
  std::vector<Node*> body;
};

struct FunctionDefNode : Node {
  FunctionDefNode() : Node(NodeKind::FunctionDef) {}
  std::string name;
  std::vector<Param> params;
  std::vector<Node*> decorators;
  Node* returns = nullptr;
  std::vector<Node*> body;
  bool is_async = false;
  int def_line = 0;  // line of the `def` keyword (span may start at a decorator)
};

struct ClassDefNode : Node {
  ClassDefNode() : Node(NodeKind::ClassDef) {}
  std::string name;
  std::vector<Node*> bases;
  std::vector<std::pair<std::string, Node*>> keywords;  // metaclass=..., **kw has empty name
  std::vector<Node*> decorators;
  std::vector<Node*> body;
  int def_line = 0;
};

struct ReturnNode : Node {
  ReturnNode() : Node(NodeKind::Return) {}
  Node* value = nullptr;
};

struct DeleteNode : Node {
  DeleteNode() : Node(NodeKind::Delete) {}
  std::vector<Node*> targets;
};

struct AssignNode : Node {
  AssignNode() : Node(NodeKind::Assign) {}
  std::vector<Node*> targets;
  Node* value = nullptr;
};

struct AugAssignNode : Node {
  AugAssignNode() : Node(NodeKind::AugAssign) {}
  Node* target = nullptr;
  std::string op;
  Node* value = nullptr;
};

struct AnnAssignNode : Node {
  AnnAssignNode() : Node(NodeKind::AnnAssign) {}
  Node* target = nullptr;
  Node* annotation = nullptr;
  Node* value = nullptr;
};

struct ForNode : Node {
  ForNode() : Node(NodeKind::For) {}
  Node* target = nullptr;
  Node* iter = nullptr;
  std::vector<Node*> body;
  std::vector<Node*> orelse;
  bool is_async = false;
};

struct WhileNode : Node {
  WhileNode() : Node(NodeKind::While) {}
  Node* test = nullptr;
  std::vector<Node*> body;
  std::vector<Node*> orelse;
};

struct IfNode : Node {
  IfNode() : Node(NodeKind::If) {}
  Node* test = nullptr;
  std::vector<Node*> body;
  std::vector<Node*> orelse;
};

struct WithItem {
  Node* context = nullptr;
  Node* alias = nullptr;
};

struct WithNode : Node {
  WithNode() : Node(NodeKind::With) {}
  std::vector<WithItem> items;
  std::vector<Node*> body;
  bool is_async = false;
};

struct RaiseNode : Node {
  RaiseNode() : Node(NodeKind::Raise) {}
  Node* exc = nullptr;
  Node* cause = nullptr;
};

struct ExceptHandler {
  Node* type = nullptr;
  std::string name;
  std::vector<Node*> body;
};

struct TryNode : Node {
  TryNode() : Node(NodeKind::Try) {}
  std::vector<Node*> body;
  std::vector<ExceptHandler> handlers;
  std::vector<Node*> orelse;
  std::vector<Node*> finalbody;
};

struct AssertNode : Node {
  AssertNode() : Node(NodeKind::Assert) {}
  Node* test = nullptr;
  Node* message = nullptr;
};

struct ImportNode : Node {
  ImportNode() : Node(NodeKind::Import) {}
};

struct ImportFromNode : Node {
  ImportFromNode() : Node(NodeKind::ImportFrom) {}
};

struct GlobalNode : Node {
  GlobalNode() : Node(NodeKind::Global) {}
  std::vector<std::string> names;
};

struct NonlocalNode : Node {
  NonlocalNode() : Node(NodeKind::Nonlocal) {}
  std::vector<std::string> names;
};

struct ExprStmtNode : Node {
  ExprStmtNode() : Node(NodeKind::ExprStmt) {}
  Node* value = nullptr;
};

struct PassNode : Node {
  PassNode() : Node(NodeKind::Pass) {}
};
struct BreakNode : Node {
  BreakNode() : Node(NodeKind::Break) {}
};
struct ContinueNode : Node {
  ContinueNode() : Node(NodeKind::Continue) {}
};

struct MatchCase {
  Node* pattern = nullptr;
  Node* guard = nullptr;
  std::vector<Node*> body;
};

struct MatchNode : Node {
  MatchNode() : Node(NodeKind::Match) {}
  Node* subject = nullptr;
  std::vector<MatchCase> cases;
};

// --- expressions ---

struct BoolOpNode : Node {
  BoolOpNode() : Node(NodeKind::BoolOp) {}
  std::string op;  // "and" | "or"
  std::vector<Node*> values;
};

struct BinOpNode : Node {
  BinOpNode() : Node(NodeKind::BinOp) {}
  Node* left = nullptr;
  std::string op;
  Node* right = nullptr;
};

struct UnaryOpNode : Node {
  UnaryOpNode() : Node(NodeKind::UnaryOp) {}
  std::string op;
  Node* operand = nullptr;
};

struct LambdaNode : Node {
  LambdaNode() : Node(NodeKind::Lambda) {}
  std::vector<Param> params;
  Node* body = nullptr;
};

struct IfExpNode : Node {
  IfExpNode() : Node(NodeKind::IfExp) {}
  Node* body = nullptr;
  Node* test = nullptr;
  Node* orelse = nullptr;
};

struct DictExprNode : Node {
  DictExprNode() : Node(NodeKind::DictExpr) {}
  std::vector<Node*> keys;  // nullptr marks a **expansion entry
  std::vector<Node*> values;
};

struct SetExprNode : Node {
  SetExprNode() : Node(NodeKind::SetExpr) {}
  std::vector<Node*> elements;
};

struct CompClause {
  Node* target = nullptr;
  Node* iter = nullptr;
  std::vector<Node*> ifs;
  bool is_async = false;
};

struct ComprehensionNode : Node {
  explicit ComprehensionNode(NodeKind k) : Node(k) {}
  Node* element = nullptr;  // or value for dict comps
  Node* key = nullptr;      // dict comps only
  std::vector<CompClause> clauses;
};

struct AwaitNode : Node {
  AwaitNode() : Node(NodeKind::Await) {}
  Node* value = nullptr;
};

struct YieldNode : Node {
  YieldNode() : Node(NodeKind::Yield) {}
  Node* value = nullptr;
};

struct YieldFromNode : Node {
  YieldFromNode() : Node(NodeKind::YieldFrom) {}
  Node* value = nullptr;
};

struct CompareNode : Node {
  CompareNode() : Node(NodeKind::Compare) {}
  Node* left = nullptr;
  std::vector<std::string> ops;
  std::vector<Node*> comparators;
};

struct CallNode : Node {
  CallNode() : Node(NodeKind::Call) {}
  Node* func = nullptr;
  std::vector<Node*> args;
  std::vector<std::pair<std::string, Node*>> keywords;  // **kw has empty name
};

struct ConstantNode : Node {
  ConstantNode() : Node(NodeKind::Constant) {}
  enum class Type { Number, String, Bool, None, Ellipsis } ctype = Type::Number;
};

struct AttributeNode : Node {
  AttributeNode() : Node(NodeKind::Attribute) {}
  Node* value = nullptr;
  std::string attr;
};

struct SubscriptNode : Node {
  SubscriptNode() : Node(NodeKind::Subscript) {}
  Node* value = nullptr;
  Node* index = nullptr;
};

struct StarredNode : Node {
  StarredNode() : Node(NodeKind::Starred) {}
  Node* value = nullptr;
  bool double_star = false;
};

struct NameNode : Node {
  NameNode() : Node(NodeKind::Name) {}
  std::string id;
};

struct ListExprNode : Node {
  ListExprNode() : Node(NodeKind::ListExpr) {}
  std::vector<Node*> elements;
};

struct TupleExprNode : Node {
  TupleExprNode() : Node(NodeKind::TupleExpr) {}
  std::vector<Node*> elements;
  bool parenthesized = false;
};

struct SliceNode : Node {
  SliceNode() : Node(NodeKind::Slice) {}
  Node* lower = nullptr;
  Node* upper = nullptr;
  Node* step = nullptr;
};

struct NamedExprNode : Node {
  NamedExprNode() : Node(NodeKind::NamedExpr) {}
  Node* target = nullptr;
  Node* value = nullptr;
};

// Owns every node of one parsed module.
struct ParseTree {
  ModuleNode* module = nullptr;
  std::vector<std::unique_ptr<Node>> arena;

  template <typename T, typename... Args>
  T* make(Args&&... args) {
    auto node = std::make_unique<T>(std::forward<Args>(args)...);
    T* raw = node.get();
    arena.push_back(std::move(node));
    return raw;
  }
};

// Invokes fn(child) for every direct expression/statement child of a node.
void for_each_child(const Node* node, const std::function<void(const Node*)>& fn);

}  // namespace smellkit::py
