"""
Group-relative advantages
=========================

Rewards inside a group are z-scored. When every candidate gets the same
reward the group carries no signal at all.
"""

import numpy as np

from geor.grpo import CandidateGroup, group_advantages, group_reward_variance, vanishing_advantage_rate

mixed = CandidateGroup.from_rewards([0.2, 0.9, 0.5, 1.0], query_id="q1")
flat = CandidateGroup.from_rewards([1.0] * 4, query_id="q2")

for g in (mixed, flat):
    adv = group_advantages(g)
    print(g.query_id, np.round(adv.advantages, 4), "degenerate" if adv.degenerate else "")

# the two-candidate case lands just under +-1 because of the epsilon
print(group_advantages(CandidateGroup.from_rewards([0.0, 1.0])).advantages)

print("vanishing rate", vanishing_advantage_rate([mixed, flat]))
print("variance", group_reward_variance([mixed, flat]))
