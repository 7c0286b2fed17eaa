"""Clustering accuracy under the best label matching, and NMI.

NMI here is mutual information divided by the *joint* entropy of the two
partitions, not by the mean or max of the marginal entropies.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class Contingency:
    table: np.ndarray
    truth_classes: np.ndarray
    pred_classes: np.ndarray

    @property
    def n(self):
        return int(self.table.sum())

    @property
    def truth_marginal(self):
        return self.table.sum(axis=1)

    @property
    def pred_marginal(self):
        return self.table.sum(axis=0)


def contingency(truth, pred):
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape:
        raise ValueError(f"label arrays differ in length: {truth.size} vs {pred.size}")
    if truth.size == 0:
        raise ValueError("label arrays are empty")
    t_classes, t_idx = np.unique(truth, return_inverse=True)
    p_classes, p_idx = np.unique(pred, return_inverse=True)
    table = np.zeros((t_classes.size, p_classes.size), dtype=np.int64)
    np.add.at(table, (t_idx, p_idx), 1)
    return Contingency(table, t_classes, p_classes)


def accuracy(truth, pred):
    """Fraction of points whose predicted cluster maps onto their true class
    under the optimal one-to-one mapping of cluster ids."""
    c = contingency(truth, pred)
    rows, cols = linear_sum_assignment(c.table, maximize=True)
    return float(c.table[rows, cols].sum()) / c.n


def nmi(truth, pred, log=np.log):
    """Mutual information over joint entropy.

    Two single-cluster partitions score 1 (the 0/0 case). ``log`` only
    exists so tests can confirm the base cancels.
    """
    c = contingency(truth, pred)
    joint = c.table / c.n
    pt = joint.sum(axis=1)
    pc = joint.sum(axis=0)
    nz = joint > 0
    pj = joint[nz]
    outer = np.outer(pt, pc)[nz]
    mi = float(np.sum(pj * (log(pj) - log(outer))))
    h_joint = float(-np.sum(pj * log(pj)))
    if h_joint <= 0:
        return 1.0
    return float(min(1.0, max(0.0, mi / h_joint)))
