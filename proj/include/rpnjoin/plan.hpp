#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rpnjoin/error.hpp"

// Binary join plans and their postfix (RPN) form.
//
// Nothing in this header recurses on tree depth: trees live in a node arena
// and every traversal runs off an explicit stack, so left-deep plans with
// hundreds of thousands of leaves are fine.
namespace rpnjoin {

class PlanTree {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kNoNode = static_cast<NodeId>(-1);

  struct Node {
    std::string relation;  // leaves only
    NodeId left = kNoNode;
    NodeId right = kNoNode;

    bool is_leaf() const noexcept { return left == kNoNode; }
  };

  static PlanTree leaf(std::string relation) {
    PlanTree t;
    t.set_root(t.add_leaf(std::move(relation)));
    return t;
  }

  NodeId add_leaf(std::string relation) {
    nodes_.push_back(Node{std::move(relation), kNoNode, kNoNode});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId add_join(NodeId left, NodeId right) {
    if (left >= nodes_.size() || right >= nodes_.size()) {
      throw std::out_of_range("join child is not a node of this tree");
    }
    nodes_.push_back(Node{{}, left, right});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void set_root(NodeId root) { root_ = root; }

  bool empty() const noexcept { return root_ == kNoNode; }
  NodeId root() const noexcept { return root_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t arena_size() const noexcept { return nodes_.size(); }

  // Node ids reachable from the root, children before parents.
  std::vector<NodeId> post_order() const {
    std::vector<NodeId> order;
    if (empty()) {
      return order;
    }
    std::vector<std::pair<NodeId, bool>> stack{{root_, false}};
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      const Node& n = nodes_[id];
      if (expanded || n.is_leaf()) {
        order.push_back(id);
        continue;
      }
      stack.push_back({id, true});
      stack.push_back({n.right, false});
      stack.push_back({n.left, false});
    }
    return order;
  }

  std::size_t node_count() const { return post_order().size(); }

  std::size_t leaf_count() const {
    std::size_t leaves = 0;
    for (NodeId id : post_order()) {
      leaves += nodes_[id].is_leaf() ? 1 : 0;
    }
    return leaves;
  }

  // Leaf relation names from left to right.
  std::vector<std::string> leaves() const {
    std::vector<std::string> names;
    for (NodeId id : post_order()) {
      if (nodes_[id].is_leaf()) {
        names.push_back(nodes_[id].relation);
      }
    }
    return names;
  }

  // Edges on the longest root-to-leaf path; a lone leaf has height 0.
  std::size_t height() const {
    std::vector<std::size_t> h(nodes_.size(), 0);
    std::size_t result = 0;
    for (NodeId id : post_order()) {
      const Node& n = nodes_[id];
      if (!n.is_leaf()) {
        h[id] = 1 + std::max(h[n.left], h[n.right]);
      }
      result = h[id];
    }
    return result;
  }

  friend bool operator==(const PlanTree& a, const PlanTree& b) {
    if (a.empty() || b.empty()) {
      return a.empty() == b.empty();
    }
    std::vector<std::pair<NodeId, NodeId>> stack{{a.root_, b.root_}};
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      const Node& nx = a.nodes_[x];
      const Node& ny = b.nodes_[y];
      if (nx.is_leaf() != ny.is_leaf()) {
        return false;
      }
      if (nx.is_leaf()) {
        if (nx.relation != ny.relation) {
          return false;
        }
        continue;
      }
      stack.push_back({nx.left, ny.left});
      stack.push_back({nx.right, ny.right});
    }
    return true;
  }

 private:
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
};

struct RpnToken {
  enum class Kind { kOperand, kJoin };

  Kind kind = Kind::kOperand;
  std::string relation;  // operands only

  static RpnToken operand(std::string relation) { return {Kind::kOperand, std::move(relation)}; }
  static RpnToken join() { return {Kind::kJoin, {}}; }

  bool is_join() const noexcept { return kind == Kind::kJoin; }
  friend bool operator==(const RpnToken&, const RpnToken&) = default;
};

using RpnProgram = std::vector<RpnToken>;

enum class PlanShape { kLinear, kBushy };

inline std::string_view to_string(PlanShape shape) {
  return shape == PlanShape::kLinear ? "linear" : "bushy";
}

inline std::optional<PlanShape> parse_plan_shape(std::string_view text) {
  if (text == "linear") return PlanShape::kLinear;
  if (text == "bushy") return PlanShape::kBushy;
  return std::nullopt;
}

namespace detail {

inline void require_names(std::span<const std::string> names) {
  if (names.empty()) {
    throw std::invalid_argument("a plan needs at least one relation");
  }
}

inline bool is_ident_start(unsigned char c) { return std::isalpha(c) != 0; }
inline bool is_ident_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(static_cast<unsigned char>(s.front()))) {
    return false;
  }
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return is_ident_char(static_cast<unsigned char>(c)); });
}

inline constexpr std::string_view kJoinKeyword = "JOIN";
inline constexpr std::string_view kJoinGlyph = "⋈";  // ⋈

}  // namespace detail

// ((n1 JOIN n2) JOIN n3) ... JOIN nk
inline PlanTree make_linear_plan(std::span<const std::string> names) {
  detail::require_names(names);
  PlanTree t;
  auto acc = t.add_leaf(names.front());
  for (std::size_t i = 1; i < names.size(); ++i) {
    acc = t.add_join(acc, t.add_leaf(names[i]));
  }
  t.set_root(acc);
  return t;
}

// Bottom-up pairing: adjacent leaves are joined pairwise, then adjacent
// results, until one root remains. An unpaired node at the end of a level is
// carried up unchanged.
inline PlanTree make_bushy_plan(std::span<const std::string> names) {
  detail::require_names(names);
  PlanTree t;
  std::vector<PlanTree::NodeId> level;
  level.reserve(names.size());
  for (const auto& n : names) {
    level.push_back(t.add_leaf(n));
  }
  while (level.size() > 1) {
    std::vector<PlanTree::NodeId> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(t.add_join(level[i], level[i + 1]));
    }
    if (level.size() % 2 == 1) {
      next.push_back(level.back());
    }
    level = std::move(next);
  }
  t.set_root(level.front());
  return t;
}

inline PlanTree make_plan(PlanShape shape, std::span<const std::string> names) {
  return shape == PlanShape::kLinear ? make_linear_plan(names) : make_bushy_plan(names);
}

inline RpnProgram to_rpn(const PlanTree& plan) {
  RpnProgram program;
  for (auto id : plan.post_order()) {
    const auto& n = plan.node(id);
    program.push_back(n.is_leaf() ? RpnToken::operand(n.relation) : RpnToken::join());
  }
  return program;
}

// Simulated operand-stack scan. Returns the deepest stack reached, or throws
// MalformedProgramError for an empty program, an underflow, or leftovers.
inline std::size_t max_stack_depth(std::span<const RpnToken> program) {
  using Reason = MalformedProgramError::Reason;
  if (program.empty()) {
    throw MalformedProgramError(Reason::kEmptyProgram, 0, "empty RPN program");
  }
  std::size_t depth = 0;
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (program[i].is_join()) {
      if (depth < 2) {
        throw MalformedProgramError(Reason::kStackUnderflow, i,
                                    "JOIN at token " + std::to_string(i) +
                                        " needs two operands, stack holds " +
                                        std::to_string(depth));
      }
      --depth;
    } else {
      deepest = std::max(deepest, ++depth);
    }
  }
  if (depth != 1) {
    throw MalformedProgramError(Reason::kLeftoverOperands, program.size(),
                                std::to_string(depth) + " operands left on the stack");
  }
  return deepest;
}

inline bool is_well_formed(std::span<const RpnToken> program) {
  try {
    max_stack_depth(program);
    return true;
  } catch (const MalformedProgramError&) {
    return false;
  }
}

inline PlanTree rpn_to_plan(std::span<const RpnToken> program) {
  max_stack_depth(program);
  PlanTree t;
  std::vector<PlanTree::NodeId> stack;
  for (const auto& token : program) {
    if (token.is_join()) {
      auto right = stack.back();
      stack.pop_back();
      auto left = stack.back();
      stack.back() = t.add_join(left, right);
    } else {
      stack.push_back(t.add_leaf(token.relation));
    }
  }
  t.set_root(stack.front());
  return t;
}

inline std::string rpn_to_text(std::span<const RpnToken> program) {
  std::string out;
  for (const auto& token : program) {
    if (!out.empty()) {
      out += ' ';
    }
    out += token.is_join() ? std::string(detail::kJoinKeyword) : token.relation;
  }
  return out;
}

// Whitespace-separated tokens; JOIN (or ⋈) is the operator, identifiers are
// operands. Well-formedness is not checked here.
inline RpnProgram parse_rpn(std::string_view text) {
  RpnProgram program;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    auto word = text.substr(pos, end - pos);
    if (word == detail::kJoinKeyword || word == detail::kJoinGlyph) {
      program.push_back(RpnToken::join());
    } else if (detail::is_identifier(word)) {
      program.push_back(RpnToken::operand(std::string(word)));
    } else {
      throw ParseError("invalid RPN token '" + std::string(word) + "'", 1, pos + 1);
    }
    pos = end;
  }
  if (program.empty()) {
    throw ParseError("empty RPN text", 1, 1);
  }
  return program;
}

// Infix form with every join parenthesized: "((R1 JOIN R2) JOIN R3)".
inline std::string plan_to_text(const PlanTree& plan) {
  std::string out;
  if (plan.empty()) {
    return out;
  }
  // Frames: 0 = not entered, 1 = left done, 2 = right done.
  std::vector<std::pair<PlanTree::NodeId, int>> stack{{plan.root(), 0}};
  while (!stack.empty()) {
    auto& [id, state] = stack.back();
    const auto& n = plan.node(id);
    if (n.is_leaf()) {
      out += n.relation;
      stack.pop_back();
      continue;
    }
    if (state == 0) {
      out += '(';
      state = 1;
      stack.push_back({n.left, 0});
    } else if (state == 1) {
      out += ' ';
      out += detail::kJoinKeyword;
      out += ' ';
      state = 2;
      stack.push_back({n.right, 0});
    } else {
      out += ')';
      stack.pop_back();
    }
  }
  return out;
}

// Infix -> RPN with a shunting-yard pass over the grammar
//   expr := term { JOIN term } ; term := IDENT | "(" expr ")"
// JOIN is the only operator and is left-associative, so a pending JOIN is
// emitted as soon as another JOIN or a closing parenthesis arrives.
inline RpnProgram infix_to_rpn(std::string_view text) {
  enum class Expect { kOperand, kOperator };
  struct Pending {
    bool is_paren;
    std::size_t column;
  };
  RpnProgram output;
  std::vector<Pending> ops;
  Expect expect = Expect::kOperand;
  std::size_t pos = 0;

  auto fail = [](const std::string& what, std::size_t at) -> ParseError {
    return ParseError(what, 1, at + 1);
  };
  auto flush_joins = [&] {
    while (!ops.empty() && !ops.back().is_paren) {
      output.push_back(RpnToken::join());
      ops.pop_back();
    }
  };

  while (pos < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[pos]);
    if (std::isspace(c)) {
      ++pos;
      continue;
    }
    if (c == '(') {
      if (expect != Expect::kOperand) throw fail("expected JOIN or ')' before '('", pos);
      ops.push_back({true, pos});
      ++pos;
    } else if (c == ')') {
      if (expect != Expect::kOperand) {
        flush_joins();
        if (ops.empty()) throw fail("unmatched ')'", pos);
        ops.pop_back();
        ++pos;
      } else {
        throw fail("expected a relation or '(' before ')'", pos);
      }
    } else if (text.substr(pos).starts_with(detail::kJoinGlyph)) {
      if (expect != Expect::kOperator) throw fail("JOIN without a left operand", pos);
      flush_joins();
      ops.push_back({false, pos});
      expect = Expect::kOperand;
      pos += detail::kJoinGlyph.size();
    } else if (detail::is_ident_start(c)) {
      std::size_t end = pos;
      while (end < text.size() && detail::is_ident_char(static_cast<unsigned char>(text[end]))) {
        ++end;
      }
      auto word = text.substr(pos, end - pos);
      if (word == detail::kJoinKeyword) {
        if (expect != Expect::kOperator) throw fail("JOIN without a left operand", pos);
        flush_joins();
        ops.push_back({false, pos});
        expect = Expect::kOperand;
      } else {
        if (expect != Expect::kOperand) throw fail("expected JOIN before '" + std::string(word) + "'", pos);
        output.push_back(RpnToken::operand(std::string(word)));
        expect = Expect::kOperator;
      }
      pos = end;
    } else {
      throw fail(std::string("unexpected character '") + text[pos] + "'", pos);
    }
    if (c == ')') {
      expect = Expect::kOperator;
    }
  }

  if (output.empty() && ops.empty()) {
    throw fail("empty plan expression", 0);
  }
  if (expect == Expect::kOperand) {
    throw fail("expression ends where a relation was expected", text.size());
  }
  flush_joins();
  if (!ops.empty()) {
    throw fail("unclosed '('", ops.back().column);
  }
  return output;
}

inline PlanTree parse_plan(std::string_view text) { return rpn_to_plan(infix_to_rpn(text)); }

}  // namespace rpnjoin
