"""Built-in codes with their published generators, logicals and corrections."""

from __future__ import annotations

from .code import StabilizerCode

__all__ = ["repetition3", "shor9", "steane7", "perfect5", "BUILTIN_CODES", "REFERENCE_BASIN", "builtin"]


def repetition3() -> StabilizerCode:
    return StabilizerCode.from_strings(
        "repetition3",
        ["ZZI", "IZZ"],
        distance=1,
        reference_logical_X=["XXX"],
        reference_logical_Z=["ZII"],
        reference_corrections=["IXI", "IIX"],
    )


def shor9() -> StabilizerCode:
    return StabilizerCode.from_strings(
        "shor9",
        [
            "XXXIIXXXI",
            "XIIXXXXIX",
            "IZIIIIIZI",
            "IIZIIIIZI",
            "IIIZIIIIZ",
            "IIIIZIIIZ",
            "ZIIIIZIII",
            "ZIIIIIZII",
        ],
        distance=3,
        reference_logical_X=["XIIIIXXII"],
        reference_logical_Z=["ZIIIIIIZZ"],
        reference_corrections=[
            "IZIIIIIII",
            "IIIZIIIII",
            "IXIIIIIII",
            "IIXIIIIII",
            "IIIXIIIII",
            "IIIIXIIII",
            "IIIIIXIII",
            "IIIIIIXII",
        ],
    )


def steane7() -> StabilizerCode:
    return StabilizerCode.from_strings(
        "steane7",
        ["XIXXXII", "XXIXIXI", "IXXXIIX", "ZZIIZIZ", "ZIZIIZZ", "IIIZZZZ"],
        distance=3,
        reference_logical_X=["XXXIIII"],
        reference_logical_Z=["ZIIIZZI"],
        reference_corrections=["ZIZZIII", "ZZIZIII", "IZZZIII", "IXIIIII", "IIXIIII", "IIIXIII"],
    )


def perfect5() -> StabilizerCode:
    return StabilizerCode.from_strings(
        "perfect5",
        ["YYZIZ", "XIXZZ", "XZZXI", "YZIZY"],
        distance=3,
        reference_logical_X=["XZIIZ"],
        reference_logical_Z=["ZZZZZ"],
        reference_corrections=["ZIXIX", "YIXXX", "YXXXI", "ZXIXI"],
    )


BUILTIN_CODES = {
    "repetition3": repetition3,
    "shor9": shor9,
    "steane7": steane7,
    "perfect5": perfect5,
}

# Gauge-qubit operators R attached to each logical X (key "X") and Z (key "Z"),
# written on the gauge qubits in permuted order.
REFERENCE_BASIN = {
    "repetition3": {"X": ["XX"], "Z": ["II"]},
    "shor9": {"X": ["IIIIXXII"], "Z": ["IIIIIIZZ"]},
    "steane7": {"X": ["XXIIII"], "Z": ["IIIZZI"]},
    "perfect5": {"X": ["ZIIZ"], "Z": ["ZZZZ"]},
}

REFERENCE_BASIN_DIMENSION = {"repetition3": 2, "shor9": 64, "steane7": 16, "perfect5": 4}


def builtin(name: str) -> StabilizerCode:
    try:
        return BUILTIN_CODES[name]()
    except KeyError:
        raise KeyError(f"unknown builtin code {name!r}; choose from {sorted(BUILTIN_CODES)}") from None
