"""Product kernels on (time, group label) pairs."""

import numpy as np

from survtest.exceptions import SchemaError
from survtest.models.kernel import GroupKernel, KernelSpec, TimeKernel

PRESET_LENGTH_SCALES = {"K1": 10.0, "K2": 1.0, "K3": 0.1, "K4": 0.05, "K5": 0.02}


def preset_kernels(rescale_times: bool = False) -> dict[str, KernelSpec]:
    """K1..K5: squared-exponential times (ℓ² = 10 … 0.02) times RQ labels with a=2, b=1."""
    return {
        name: KernelSpec(
            time_kernel=TimeKernel(family="se", scale=scale),
            group_kernel=GroupKernel(family="rq", a=2.0, b=1.0),
            rescale_times=rescale_times,
            name=name,
        )
        for name, scale in PRESET_LENGTH_SCALES.items()
    }


def parse_kernel(text: str, rescale_times: bool = False) -> KernelSpec:
    """Parse 'K3', 'se:10,rq:2:1', 'ou:2,id' and similar."""
    text = text.strip()
    presets = preset_kernels(rescale_times)
    if text.upper() in presets:
        return presets[text.upper()]
    time_kernel, group_kernel = TimeKernel(), GroupKernel()
    try:
        for part in text.split(","):
            family, *params = part.strip().split(":")
            family = family.lower()
            if family in ("se", "ou"):
                time_kernel = TimeKernel(family=family, scale=float(params[0]))
            elif family == "rq":
                group_kernel = GroupKernel(family="rq", a=float(params[0]), b=float(params[1]))
            elif family in ("id", "identity"):
                group_kernel = GroupKernel(family="identity")
            else:
                raise SchemaError(f"unknown kernel component '{part}'")
    except (IndexError, ValueError) as e:
        raise SchemaError(f"cannot parse kernel '{text}': {e}") from e
    return KernelSpec(time_kernel=time_kernel, group_kernel=group_kernel, rescale_times=rescale_times, name=text)


def time_kernel_eval(spec: KernelSpec, t, s):
    """L(t, s); broadcasts over numpy arrays."""
    diff = np.subtract(t, s)
    if spec.time_kernel.family == "se":
        return np.exp(-(diff**2) / spec.time_kernel.scale)
    return np.exp(-np.abs(diff) / abs(spec.time_kernel.scale))


def time_kernel_matrix(spec: KernelSpec, times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    return time_kernel_eval(spec, times[:, None], times[None, :])


def group_kernel_matrix(spec: KernelSpec, k: int) -> np.ndarray:
    """J with labels embedded as the integers 1..k."""
    if spec.group_kernel.family == "identity":
        return np.eye(k)
    labels = np.arange(1, k + 1, dtype=float)
    sq = (labels[:, None] - labels[None, :]) ** 2
    a, b = spec.group_kernel.a, spec.group_kernel.b
    return (1.0 + sq / (2.0 * a * b**2)) ** (-a)


def product_kernel(spec: KernelSpec, t: float, i: int, s: float, j: int, k: int) -> float:
    return float(time_kernel_eval(spec, t, s) * group_kernel_matrix(spec, k)[i - 1, j - 1])


def rescale(times: np.ndarray) -> np.ndarray:
    """Divide by the largest observed time so that times lie in (0, 1]."""
    times = np.asarray(times, dtype=float)
    top = times.max()
    if top <= 0:
        raise ValueError("rescaling needs a positive maximum time")
    return times / top


def kernel_times(spec: KernelSpec, times: np.ndarray) -> np.ndarray:
    return rescale(times) if spec.rescale_times else np.asarray(times, dtype=float)
