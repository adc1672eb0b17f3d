from typing import Literal

from pydantic import BaseModel, PositiveFloat


class TimeKernel(BaseModel):
    family: Literal["se", "ou"] = "se"
    scale: PositiveFloat = 0.1  # ℓ² for "se", σ for "ou"

    model_config = {"frozen": True}


class GroupKernel(BaseModel):
    family: Literal["rq", "identity"] = "rq"
    a: PositiveFloat = 2.0
    b: PositiveFloat = 1.0

    model_config = {"frozen": True}


class KernelSpec(BaseModel):
    """Product kernel K((t,i),(s,j)) = L(t,s)·J(i,j)."""

    time_kernel: TimeKernel = TimeKernel()
    group_kernel: GroupKernel = GroupKernel()
    rescale_times: bool = False
    name: str | None = None

    model_config = {"frozen": True}

    def describe(self) -> str:
        if self.time_kernel.family == "se":
            time_part = f"se:{self.time_kernel.scale:g}"
        else:
            time_part = f"ou:{self.time_kernel.scale:g}"
        if self.group_kernel.family == "rq":
            group_part = f"rq:{self.group_kernel.a:g}:{self.group_kernel.b:g}"
        else:
            group_part = "id"
        return f"{time_part},{group_part}"
