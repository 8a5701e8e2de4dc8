#pragma once

#include <memory>
#include <mutex>
#include <optional>

#include "meip/environment.hpp"
#include "meip/fold/actions.hpp"
#include "meip/fold/fluents.hpp"

namespace meip::fold {

/// Scene carried by a fold state, with the legal-action list cached per environment.
struct FoldNode {
  FoldScene scene;
  mutable std::mutex mu;
  mutable const void* owner = nullptr;
  mutable std::vector<std::string> legal;
};

using FoldNodePtr = std::shared_ptr<const FoldNode>;

inline State fold_state(FoldScene scene) {
  State s = evaluate_fold_fluents(scene);
  auto node = std::make_shared<FoldNode>();
  node->scene = std::move(scene);
  s.set_payload(std::make_shared<const std::any>(FoldNodePtr(node)));
  return s;
}

inline const FoldScene& scene_of(const State& s) {
  const FoldNodePtr* n = s.payload<FoldNodePtr>();
  if (!n) throw EnvironmentError("state carries no fold scene (replay it through the fold environment)");
  return (*n)->scene;
}

/// Folding world: a fixed number of folds, actions from the discretization,
/// optionally narrowed to the top-k proposals around demo exemplars.
class FoldEnv : public Environment {
 public:
  FoldEnv(FoldScene scene, std::size_t folds, Discretization disc = {}, std::vector<FoldAction> exemplars = {},
          ProposalConfig proposal = {})
      : initial_(fold_state(std::move(scene))),
        folds_(folds),
        disc_(disc),
        exemplars_(std::move(exemplars)),
        proposal_(proposal) {
    if (folds_ < 1) throw ConfigError("fold environment needs at least one fold");
    disc_.validate();
    proposal_.validate();
  }

  const Schema& schema() const override { return fold_schema(); }
  std::string problem_id() const override { return initial_.problem_id(); }
  std::size_t horizon() const override { return folds_ + 1; }
  State initial_state() const override { return initial_; }
  const Discretization& discretization() const { return disc_; }
  const FoldScene& initial_scene() const { return scene_of(initial_); }

  std::vector<std::string> legal_actions(const History& h) const override {
    if (h.size() > folds_) return {};
    const FoldNodePtr* n = h.back().payload<FoldNodePtr>();
    if (!n) throw EnvironmentError("state carries no fold scene");
    std::lock_guard<std::mutex> lock((*n)->mu);
    if ((*n)->owner != this) {
      std::vector<std::string> out;
      for (const auto& a : proposed_actions((*n)->scene, exemplars_, disc_, proposal_))
        out.push_back(a.label());
      (*n)->legal = std::move(out);
      (*n)->owner = this;
    }
    return (*n)->legal;
  }

  std::vector<Outcome> outcomes(const History& h, const std::string& action) const override {
    const FoldScene& s = scene_of(h.back());
    return {{fold_state(s.folded(action_line(s, FoldAction::parse(action), disc_))), 1.0}};
  }

 private:
  State initial_;
  std::size_t folds_;
  Discretization disc_;
  std::vector<FoldAction> exemplars_;
  ProposalConfig proposal_;
};

}  // namespace meip::fold
