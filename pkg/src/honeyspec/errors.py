"""Exception hierarchy shared by all honeyspec modules."""


class HoneySpecError(Exception):
    """Base class for every error raised by this package."""


# dataset
class DatasetError(HoneySpecError):
    pass


class EmptyDataset(DatasetError):
    pass


class BandCountMismatch(DatasetError):
    pass


class NonNumericBand(DatasetError):
    pass


class UnknownLevel(DatasetError):
    pass


class GroupLabelConflict(DatasetError):
    pass


class InvalidSpec(DatasetError):
    pass


# shared numeric preconditions
class DimensionMismatch(HoneySpecError):
    pass


class NonFiniteInput(HoneySpecError):
    pass


# dimred
class TooFewSamples(HoneySpecError):
    pass


class InvalidComponentCount(HoneySpecError):
    pass


class SingleClass(HoneySpecError):
    pass


# classify
class EmptyTrainingSet(HoneySpecError):
    pass


class KOutOfRange(HoneySpecError):
    pass


class DegenerateLabels(HoneySpecError):
    pass


# eval
class LengthMismatch(HoneySpecError):
    pass


class UnknownLabel(HoneySpecError):
    pass


class EmptyMatrix(HoneySpecError):
    pass


class InsufficientGroups(HoneySpecError):
    pass


class FoldDegenerate(HoneySpecError):
    def __init__(self, fold: int, message: str = ""):
        self.fold = fold
        super().__init__(message or f"fold {fold} has a single training class")


# pipeline
class SingleOrigin(HoneySpecError):
    pass


class UnknownOrigin(HoneySpecError):
    pass


class BadModelFile(HoneySpecError):
    pass


class UnsupportedVersion(BadModelFile):
    pass


class TruncatedFile(BadModelFile):
    pass
