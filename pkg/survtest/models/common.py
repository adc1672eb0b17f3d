from typing import Annotated

import numpy as np
from pydantic import BaseModel, BeforeValidator, PlainSerializer


def _as_float_array(value) -> np.ndarray:
    return np.array(value, dtype=float)


def _as_int_array(value) -> np.ndarray:
    return np.array(value, dtype=np.int64)


# numpy arrays that validate from lists and serialize back to lists
FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_float_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
IntArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_int_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]

ARRAY_CONFIG = {"arbitrary_types_allowed": True, "frozen": True}


class ErrorDocument(BaseModel):
    error_code: str
    message: str
