"""Independent reference implementations used by several test modules."""

import math


def brute_knn(train_X, train_y, classes, k, q):
    """Full distance list, stable sort, majority vote with summed-distance then vocabulary tie-break."""
    dists = [(math.sqrt(sum((a - b) ** 2 for a, b in zip(row, q))), i) for i, row in enumerate(train_X)]
    dists.sort(key=lambda t: t[0])  # list.sort is stable: equal distances keep index order
    top = dists[:k]
    votes = {}
    for d, i in top:
        c = train_y[i]
        cnt, total = votes.get(c, (0, 0.0))
        votes[c] = (cnt + 1, total + d)
    order = {c: n for n, c in enumerate(classes)}
    return min(votes, key=lambda c: (-votes[c][0], votes[c][1], order[c]))


def macro_recall(counts):
    recalls = []
    for i, row in enumerate(counts):
        total = sum(row)
        if total:
            recalls.append(row[i] / total)
    return sum(recalls) / len(recalls)
