# This file is part of disentanglement
#
# MIT License

from typing import Sequence, TypeAlias, Union

import numpy as np
import numpy.typing as npt

ComplexArray: TypeAlias = npt.NDArray[np.complex128]
RealArray: TypeAlias = npt.NDArray[np.float64]

LabelsArg: TypeAlias = Union[str, Sequence[str]]
CutArg: TypeAlias = tuple[LabelsArg, LabelsArg]
