"""Draw a unit ball from `sclkit --json ball ...` output.

    sclkit --json ball graphs/chain3.gg | python3 docs/plot_ball.py ball.png
"""
import json
import sys
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

fan = json.load(sys.stdin)
if not fan["bounded"]:
    sys.exit("unbounded ball: the norm vanishes along " + ", ".join("(%s, %s)" % tuple(r) for r in fan["lineality"]))
xs, ys = zip(*[(float(Fraction(x)), float(Fraction(y))) for x, y in fan["vertices"]])
fig, ax = plt.subplots(figsize=(4, 4))
ax.fill(xs, ys, alpha=0.3)
ax.plot(xs + xs[:1], ys + ys[:1], marker="o")
for (x, y), label in zip(zip(xs, ys), fan["vertices"]):
    ax.annotate("(%s, %s)" % tuple(label), (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
ax.axhline(0, color="grey", lw=0.5)
ax.axvline(0, color="grey", lw=0.5)
ax.set_aspect("equal")
ax.set_xlabel("A1")
ax.set_ylabel("A2")
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "ball.png", bbox_inches="tight")
