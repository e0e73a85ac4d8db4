""" This module describes system wide enums.
"""


class Enum(object):
    """ Base class for enums
    """
    __global_increment = 1

    def __init__(self, for_str):
        """ Initialize base class for enumerates.
        :param for_str: return value for build in str() function
        """
        self.value = Enum.__global_increment
        self._str = for_str
        Enum.__global_increment += 1

    def __eq__(self, other):
        return isinstance(other, Enum) and self.value == other.value

    def __ne__(self, other):
        return not self.__eq__(other)

    def __str__(self):
        return self._str

    def __repr__(self):
        return self._str

    def __hash__(self):
        return self.value


def parse(enum_values, text):
    """ Find enum value by its string representation.
    :param enum_values: iterable with candidates.
    :param text: string to look for.
    :return: enum value.
    """
    for v in enum_values:
        if str(v) == text:
            return v
    raise ValueError("unknown value '{}', expected one of {}"
                     .format(text, ', '.join(str(v) for v in enum_values)))


class ModeKind(Enum):
    """ Constraint put on the columns of a factor matrix.
    """
    pass

UNIT_COLUMNS = ModeKind("unit-columns")
ORTHONORMAL = ModeKind("orthonormal")


class Solver(Enum):
    """ Enum for choosing decomposition algorithm.
    """
    pass

SOLVER_HQ_ADMM = Solver("hq-admm")
SOLVER_ALS = Solver("als")
SOLVERS = (SOLVER_HQ_ADMM, SOLVER_ALS)


class Normalization(Enum):
    """ Enum for choosing how video pixels are scaled.
    """
    pass

NORMALIZATION_MAXVAL = Normalization("maxval")
NORMALIZATION_FROBENIUS = Normalization("frobenius")
NORMALIZATIONS = (NORMALIZATION_MAXVAL, NORMALIZATION_FROBENIUS)


class ForegroundMode(Enum):
    """ Enum for choosing how foreground frames are rendered.
    """
    pass

FOREGROUND_ABS = ForegroundMode("abs")
FOREGROUND_OFFSET = ForegroundMode("offset")
FOREGROUND_MODES = (FOREGROUND_ABS, FOREGROUND_OFFSET)
