"""Batch figure rendering over the simulator's CSV outputs.

The simulator side of the fence only ever writes three CSV schemas (sweep,
samples, trace); everything here reads those files back and draws. No
simulator imports — if the columns are right, the source doesn't matter.
"""

FIGURE_KINDS = ("separation-box", "ttc-scatter", "throughput", "spatiotemporal")
