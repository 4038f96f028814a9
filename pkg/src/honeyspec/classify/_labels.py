import numpy as np


def label_array(classes: tuple, codes: np.ndarray) -> np.ndarray:
    """Map class indices back to labels: object array for string labels, int64 otherwise."""
    if any(isinstance(c, str) for c in classes):
        lookup = np.array(classes, dtype=object)
    else:
        lookup = np.array(classes, dtype=np.int64)
    return lookup[np.asarray(codes, dtype=np.int64)]


def encode(y, classes: tuple) -> np.ndarray:
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup[v] for v in np.asarray(y).tolist()], dtype=np.int64)


def vocabulary(y) -> tuple:
    return tuple(sorted(set(np.asarray(y).tolist())))
