"""Built-in games, returned as config dicts so they serialise like user configs."""


def no_one_get_it():
    """Players start on the ground and may climb once; the last step
    penalises crowding with 10 times the share of players on one's level."""
    stay_up = [[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [0.0, 1.0]]]
    down = [[1.0, 0.0], [1.0, 0.0]]
    return {
        "name": "no_one_get_it",
        "horizon": 3,
        "states": {"labels": ["ground", "upper"], "metric": [[0, 1], [1, 0]]},
        "actions": {"labels": ["stay", "up"], "metric": [[0, 1], [1, 0]]},
        "initial": [1.0, 0.0],
        "transition": {"kind": "xi_independent", "P": stay_up},
        "cost": {"kind": "table", "base": [[[0, 0], [0, 0]], [[0, 0], [-1, -1]]]},
        "terminal": {"kind": "affine", "V0": [0, 0], "M": [[10, 0], [0, 10]]},
        "evaluator": {"kind": "expected_sum"},
        "policy": {
            "kind": "threshold",
            "state": 1,
            "tau": 0.0,
            "below": [down, [[0.5, 0.5], [1.0, 0.0]]],
            "above": [down, [[0.0, 1.0], [0.0, 1.0]]],
        },
    }


def crowd():
    """Two locations with congestion costs and crowd-averse terminal cost.

    Moving succeeds with high probability; the success rate degrades a
    little as the right location fills up.  Staying is free, moving costs
    0.1, and each location charges its base rate plus 0.4 times its
    occupancy.  The policy is a logit rule that leans away from the crowd.
    """
    T = 4
    P0 = [[[0.95, 0.05], [0.15, 0.85]], [[0.05, 0.95], [0.85, 0.15]]]
    P1 = [[[0.85, 0.15], [0.25, 0.75]], [[0.15, 0.85], [0.75, 0.25]]]
    base = [[0.0, 0.1], [0.6, 0.7]]
    M = [[[0.4, 0.0], [0.4, 0.0]], [[0.0, 0.4], [0.0, 0.4]]]
    return {
        "name": "crowd",
        "horizon": T,
        "states": {"labels": ["left", "right"], "metric": [[0, 1], [1, 0]]},
        "actions": {"labels": ["stay", "move"], "metric": [[0, 1], [1, 0]]},
        "initial": [0.3, 0.7],
        "transition": {"kind": "table_affine", "P0": P0, "P1": P1, "c0": 0.0, "c": [0.0, 1.0]},
        "cost": {"kind": "table_affine", "base": base, "M": M},
        "terminal": {"kind": "affine", "V0": [0.0, 0.5], "M": [[0.6, 0.0], [0.0, 0.6]]},
        "evaluator": {"kind": "expected_sum"},
        "policy": {
            "kind": "logit_meanfield",
            "theta_coef": 2.0,
            "phi": [[0.0, -0.5], [-0.5, 0.0]],
            "rho": 1.0,
            "M": [[0.0, 0.0], [1.0, -1.0]],
        },
    }


def chain():
    """Population-independent three-state chain; a single-agent MDP in disguise."""
    P = [
        [[0.8, 0.2, 0.0], [0.1, 0.6, 0.3]],
        [[0.3, 0.6, 0.1], [0.0, 0.3, 0.7]],
        [[0.0, 0.4, 0.6], [0.2, 0.2, 0.6]],
    ]
    return {
        "name": "chain",
        "horizon": 4,
        "states": {"labels": ["s0", "s1", "s2"], "metric": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]},
        "actions": {"labels": ["rest", "push"], "metric": [[0, 1], [1, 0]]},
        "initial": [0.5, 0.3, 0.2],
        "transition": {"kind": "xi_independent", "P": P},
        "cost": {"kind": "table", "base": [[0.4, 0.55], [0.2, 0.3], [0.05, 0.2]]},
        "terminal": {"kind": "affine", "V0": [1.0, 0.5, 0.0]},
        "evaluator": {"kind": "expected_sum"},
    }


def zero_cost():
    P = [[[0.5, 0.5], [0.2, 0.8]], [[0.7, 0.3], [0.1, 0.9]]]
    return {
        "name": "zero_cost",
        "horizon": 3,
        "states": {"labels": ["a", "b"], "metric": [[0, 1], [1, 0]]},
        "actions": {"labels": ["u", "v"], "metric": [[0, 1], [1, 0]]},
        "initial": [0.6, 0.4],
        "transition": {"kind": "xi_independent", "P": P},
        "cost": {"kind": "table", "base": [[0, 0], [0, 0]]},
        "terminal": {"kind": "zero"},
        "evaluator": {"kind": "expected_sum"},
    }


def single_state():
    """One state, action a costs 1 and action b costs 0, two steps."""
    return {
        "name": "single_state",
        "horizon": 2,
        "states": {"labels": ["o"], "metric": [[0]]},
        "actions": {"labels": ["a", "b"], "metric": [[0, 1], [1, 0]]},
        "initial": [1.0],
        "transition": {"kind": "xi_independent", "P": [[[1.0], [1.0]]]},
        "cost": {"kind": "table", "base": [[1.0, 0.0]]},
        "terminal": {"kind": "zero"},
        "evaluator": {"kind": "expected_sum"},
        "policy": {"kind": "oblivious_table", "table": [[1.0, 0.0]]},
    }


def coin():
    """Two points at distance 2, every step a fair coin flip."""
    return {
        "name": "coin",
        "horizon": 3,
        "states": {"labels": ["h", "t"], "metric": [[0, 2], [2, 0]]},
        "actions": {"labels": ["flip"], "metric": [[0]]},
        "initial": [0.5, 0.5],
        "transition": {"kind": "xi_independent", "P": [[[0.5, 0.5]], [[0.5, 0.5]]]},
        "cost": {"kind": "table", "base": [[0.0], [0.0]]},
        "terminal": {"kind": "zero"},
        "evaluator": {"kind": "expected_sum"},
        "policy": {"kind": "oblivious_table", "table": [[1.0], [1.0]]},
    }


BUILTINS = {
    "no_one_get_it": no_one_get_it,
    "crowd": crowd,
    "chain": chain,
    "zero_cost": zero_cost,
    "single_state": single_state,
    "coin": coin,
}
