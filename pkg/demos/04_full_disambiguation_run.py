"""
The complete kidnapped-robot run
================================

Execute the shipped eight-room scenario end to end: uniform prior, stationary
filtering down to 8 hypotheses, then receding-horizon planning that walks the
robot out of its room, past the island markers (8 -> 2 symmetric hypotheses)
and into the narrow passage whose unique markers settle the matter.  Renders
the same figures the `activeloc plot` subcommand produces.
"""

from pathlib import Path

from activeloc import plots
from activeloc.config import load_scenario
from activeloc.sim import run_scenario
from activeloc.world import load_map

here = Path(__file__).resolve().parent
cfg = load_scenario(here.parent / "scenarios" / "maze8.yaml")
cfg.seed = 5

result = run_scenario(cfg)
best = result.final_belief.modes[result.final_belief.argmax()]
print(f"converged: {result.converged} after {result.epochs} replanning epochs")
print(f"final hypothesis: ({best.mean.x:.2f}, {best.mean.y:.2f}, "
      f"{best.mean.theta:+.2f}) with weight {best.weight:.4f}")
print(f"ground truth:     ({result.truth.x:.2f}, {result.truth.y:.2f}, "
      f"{result.truth.theta:+.2f})")

mode_counts = [len(s["modes"]) for s in result.trace.steps()]
print("hypothesis count milestones:",
      sorted(set(mode_counts), reverse=True))
for e in result.trace.events("epoch_end"):
    print(f"  epoch {e['epoch']}: ended on {e['reason']}, "
          f"{e['n_modes']} hypotheses remain")

env = load_map(cfg.map_path)
outputs = plots.render_all(result.trace, env, here / "output" / "04_run")
for p in outputs:
    print("figure:", p)
