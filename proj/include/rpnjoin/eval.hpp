#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "rpnjoin/error.hpp"
#include "rpnjoin/join.hpp"
#include "rpnjoin/plan.hpp"
#include "rpnjoin/relation.hpp"

namespace rpnjoin {

enum class EvalMode { kSequential, kConcurrent };

inline std::string_view to_string(EvalMode mode) {
  return mode == EvalMode::kSequential ? "sequential" : "concurrent";
}

inline std::optional<EvalMode> parse_eval_mode(std::string_view text) {
  if (text == "sequential") return EvalMode::kSequential;
  if (text == "concurrent") return EvalMode::kConcurrent;
  return std::nullopt;
}

// Everything an evaluation needs besides the program. counters accumulates
// over all joins of every evaluation run with this context; its page_size
// selects the simulated page size.
struct EvalContext {
  explicit EvalContext(const Catalog& c, JoinAlgorithm a = JoinAlgorithm::kSortMerge,
                       EvalMode m = EvalMode::kSequential)
      : catalog(&c), algorithm(a), mode(m) {}

  const Catalog* catalog;
  JoinAlgorithm algorithm;
  EvalMode mode;
  JoinResultPolicy policy;
  CostCounters counters;
};

namespace detail {

// Operand stack entry: either a base relation borrowed from the catalog or a
// materialized intermediate result.
using Operand = std::variant<const Relation*, Relation>;

inline const Relation& deref(const Operand& op) {
  if (auto p = std::get_if<const Relation*>(&op)) {
    return **p;
  }
  return std::get<Relation>(op);
}

inline Relation release(Operand&& op) {
  if (auto p = std::get_if<const Relation*>(&op)) {
    return **p;
  }
  return std::get<Relation>(std::move(op));
}

inline Relation eval_sequential(std::span<const RpnToken> program, EvalContext& ctx) {
  using Reason = MalformedProgramError::Reason;
  if (program.empty()) {
    throw MalformedProgramError(Reason::kEmptyProgram, 0, "empty RPN program");
  }
  std::vector<Operand> stack;
  for (std::size_t i = 0; i < program.size(); ++i) {
    const auto& token = program[i];
    if (!token.is_join()) {
      stack.emplace_back(&ctx.catalog->get(token.relation));
      continue;
    }
    if (stack.size() < 2) {
      throw MalformedProgramError(Reason::kStackUnderflow, i,
                                  "JOIN at token " + std::to_string(i) +
                                      " needs two operands, stack holds " +
                                      std::to_string(stack.size()));
    }
    Operand right = std::move(stack.back());
    stack.pop_back();
    Relation joined =
        join(ctx.algorithm, deref(stack.back()), deref(right), ctx.policy, ctx.counters);
    stack.back() = std::move(joined);
  }
  if (stack.size() != 1) {
    throw MalformedProgramError(Reason::kLeftoverOperands, program.size(),
                                std::to_string(stack.size()) + " operands left on the stack");
  }
  return release(std::move(stack.back()));
}

// Joins are grouped by height above the leaves. Two joins of equal height can
// never be ancestor and descendant, so each group runs in parallel once the
// previous group has finished. Per-join counters are summed afterwards, which
// gives the same totals as the sequential scan.
inline Relation eval_concurrent(std::span<const RpnToken> program, EvalContext& ctx) {
  const PlanTree plan = rpn_to_plan(program);
  const auto order = plan.post_order();

  std::vector<std::size_t> height(plan.arena_size(), 0);
  std::vector<std::vector<PlanTree::NodeId>> by_height;
  for (auto id : order) {
    const auto& n = plan.node(id);
    if (n.is_leaf()) {
      ctx.catalog->get(n.relation);
      continue;
    }
    height[id] = 1 + std::max(height[n.left], height[n.right]);
    if (by_height.size() < height[id]) by_height.resize(height[id]);
    by_height[height[id] - 1].push_back(id);
  }

  std::vector<Operand> value(plan.arena_size());
  for (auto id : order) {
    if (plan.node(id).is_leaf()) value[id] = &ctx.catalog->get(plan.node(id).relation);
  }

  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (const auto& level : by_height) {
    for (std::size_t start = 0; start < level.size(); start += workers) {
      const std::size_t end = std::min(level.size(), start + workers);
      std::vector<std::future<std::pair<Relation, CostCounters>>> pending;
      for (std::size_t k = start; k < end; ++k) {
        const auto& n = plan.node(level[k]);
        const Relation& left = deref(value[n.left]);
        const Relation& right = deref(value[n.right]);
        pending.push_back(std::async(std::launch::async, [&ctx, &left, &right] {
          CostCounters local;
          local.page_size = ctx.counters.page_size;
          Relation r = join(ctx.algorithm, left, right, ctx.policy, local);
          return std::pair{std::move(r), local};
        }));
      }
      for (std::size_t k = start; k < end; ++k) {
        auto [r, local] = pending[k - start].get();
        ctx.counters += local;
        value[level[k]] = std::move(r);
      }
      // Children are no longer needed once their parent exists.
      for (std::size_t k = start; k < end; ++k) {
        const auto& n = plan.node(level[k]);
        value[n.left] = static_cast<const Relation*>(nullptr);
        value[n.right] = static_cast<const Relation*>(nullptr);
      }
    }
  }
  return release(std::move(value[plan.root()]));
}

}  // namespace detail

// Evaluates a postfix join program on an explicit operand stack: an operand
// pushes its catalog relation, JOIN pops the right then the left operand and
// pushes their join. Exactly one relation must remain at the end.
inline Relation eval_rpn(std::span<const RpnToken> program, EvalContext& ctx) {
  if (ctx.mode == EvalMode::kConcurrent) {
    return detail::eval_concurrent(program, ctx);
  }
  return detail::eval_sequential(program, ctx);
}

inline Relation eval_plan(const PlanTree& plan, EvalContext& ctx) {
  return eval_rpn(to_rpn(plan), ctx);
}

}  // namespace rpnjoin
