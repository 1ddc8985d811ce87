"""Default discretization rules for the cardiac registry columns.

Thresholds are clinical reference ranges. Bounds are lower-inclusive and
upper-exclusive unless a rule reads "<=", in which case the upper bound is
closed.  Every table can be
overridden with a BinSpec file.
"""
from __future__ import annotations

from .dataset import Bin, BinSpec

INF = float("inf")


def _three(low, high, sex=None):
    return [
        Bin("low", -INF, low, "[)", sex),
        Bin("normal", low, high, "[)", sex),
        Bin("high", high, INF, "[)", sex),
    ]


def _le_split(threshold, below, above):
    return [Bin(below, -INF, threshold, "(]"), Bin(above, threshold, INF, "()")]


def default_binspecs() -> list[BinSpec]:
    specs = [
        BinSpec("Glucose", _three(60, 200), "Glucoseplasma2"),
        BinSpec("WBC", _three(4.0, 10.0), "WBC2"),
        BinSpec("SBP", _three(90, 140), "SBP2"),
        BinSpec("LastEF", _le_split(50, "low", "normal"), "EF2"),
        BinSpec("LDL", _le_split(130, "normal", "high"), "LDL2"),
        BinSpec("HDL", _le_split(40, "low", "normal"), "HDL2"),
        BinSpec("TG", _le_split(200, "normal", "high"), "TG2"),
        BinSpec("TotalChol", _le_split(200, "normal", "high"), "TotalChol2"),
        BinSpec("PLT", _three(150, 399), "PLT2"),
        BinSpec("HR", _three(60, 100), "HR2"),
    ]
    for src, out in (("FirstCKMB", "FirstCKMB2"), ("HighestCKMB", "HigestCKMB2")):
        specs.append(BinSpec(src, _three(5, 25), out))
    # the CPK normal range collapses to the single point 200
    for src, out in (("FirstCPK", "FirstCPK2"), ("HighestCPK", "Higest_CPK2")):
        specs.append(BinSpec(src, [
            Bin("low", -INF, 200, "[)"),
            Bin("normal", 200, 200, "[]"),
            Bin("high", 200, INF, "()"),
        ], out))
    for src, out in (("EarlyCr", "EarlyCr2"), ("HighestCr", "Higestcr2")):
        specs.append(BinSpec(
            src, _three(0.75, 1.2, "male") + _three(0.65, 1.0, "female"), out
        ))
    for src, out in (("EarlyHB", "EarlyHb2"), ("LeastHB", "LeastHb2")):
        specs.append(BinSpec(
            src, _three(13.5, 17.5, "male") + _three(12, 16, "female"), out
        ))
    specs += [
        BinSpec("Age", [
            Bin("18-30", -INF, 30, "(]"),
            Bin("31-40", 30, 40, "(]"),
            Bin("41-50", 40, 50, "(]"),
            Bin("51-60", 50, 60, "(]"),
            Bin("61-above", 60, INF, "()"),
        ], "Age3"),
        BinSpec("Age", [
            Bin("young", -INF, 30, "[)"),
            Bin("middle-aged", 30, 45, "[)", "male"),
            Bin("old", 45, INF, "[)", "male"),
            Bin("middle-aged", 30, 55, "[)", "female"),
            Bin("old", 55, INF, "[)", "female"),
        ], "Age2"),
        BinSpec("BMI", [
            Bin("Underweight", -INF, 18.5),
            Bin("Normal weight", 18.5, 25),
            Bin("Overweight", 25, 30),
            Bin("Obesity class1", 30, 35),
            Bin("Obesity class2", 35, 40),
            Bin("Obesity class3", 40, INF),
        ], "CatBMI"),
        BinSpec("BMI", _le_split(25, "no", "yes"), "Obesity"),
        BinSpec("GFR", [
            Bin("kidney_failure", -INF, 15),
            Bin("kidney_disease", 15, 60),
            Bin("normal", 60, INF),
        ], "GFR2"),
        BinSpec("SymptomToAdmission", [
            Bin("<4", -INF, 4), Bin("4-8", 4, 8), Bin(">8", 8, INF),
        ], "STDminonlyAli_SMh2"),
        BinSpec("LOS", [
            Bin("<3", -INF, 3), Bin("3to7", 3, 7), Bin("7to14", 7, 14), Bin(">14", 14, INF),
        ], "LOS2"),
    ]
    return specs


def binspecs_for(columns) -> list[BinSpec]:
    """Default specs whose source is present and whose output is not."""
    present = set(columns)
    return [
        s for s in default_binspecs() if s.column in present and s.output_column not in present
    ]
