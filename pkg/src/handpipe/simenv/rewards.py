"""Pure reward functions mirroring the environment's shaping, with analytic
gradients for the finite-difference checks."""

import numpy as np

from .config import RewardWeights


def reward_relocate(hand_pos, obj_pos, target, lifted,
                    weights: RewardWeights = None):
    w = weights or RewardWeights()
    hand_pos = np.asarray(hand_pos, dtype=float)
    d_ho = np.linalg.norm(hand_pos - obj_pos)
    d_ht = np.linalg.norm(hand_pos - target)
    d_ot = np.linalg.norm(np.asarray(obj_pos) - target)
    lift = float(lifted)
    return (-w.reach * d_ho - w.carry_hand * d_ht * lift
            - w.carry_obj * d_ot * lift + w.lift_bonus * lift)


def reward_relocate_grad_hand(hand_pos, obj_pos, target, lifted,
                              weights: RewardWeights = None):
    """d reward / d hand_pos at fixed lift state."""
    w = weights or RewardWeights()
    hand_pos = np.asarray(hand_pos, dtype=float)
    obj_pos = np.asarray(obj_pos, dtype=float)
    target = np.asarray(target, dtype=float)
    g = np.zeros(3)
    d_ho = np.linalg.norm(hand_pos - obj_pos)
    if d_ho > 1e-12:
        g -= w.reach * (hand_pos - obj_pos) / d_ho
    if lifted:
        d_ht = np.linalg.norm(hand_pos - target)
        if d_ht > 1e-12:
            g -= w.carry_hand * (hand_pos - target) / d_ht
    return g


def reward_pour(hand_pos, mug_pos, pour_point, fraction_inside, lifted,
                weights: RewardWeights = None):
    w = weights or RewardWeights()
    d_ho = np.linalg.norm(np.asarray(hand_pos) - mug_pos)
    d_op = np.linalg.norm(np.asarray(mug_pos) - pour_point)
    lift = float(lifted)
    return (10.0 * w.pour_main * fraction_inside - w.reach * d_ho
            - w.carry_obj * d_op * lift + w.lift_bonus * lift)
