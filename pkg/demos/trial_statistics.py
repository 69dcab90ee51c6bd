"""Monte-Carlo round counts of the gate-teleportation gadgets."""
import sys

from measonly.stats import GADGETS, round_statistics

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
for gadget in GADGETS:
    st = round_statistics(gadget, trials, seed=0)
    print(f"{gadget:>10}: mean {st.mean:6.3f} ± {st.stderr:.3f}  range [{st.min}, {st.max}]  "
          f"one-round fraction {st.one_round_fraction:.3f}  ({st.trials} trials)")
