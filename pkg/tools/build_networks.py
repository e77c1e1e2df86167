#!/usr/bin/env python3
"""Build the benchmark network fixtures under networks/.

CHILD carries hand-written tables; INSURANCE and ALARM use their published
structures with hand-set root priors and generated near-deterministic
conditionals; HAILFINDER is a size-matched synthetic stand-in; CHILD3 and
CHILD5 tile CHILD with two extra edges per junction. Everything is seeded,
so the files are reproducible byte for byte.
"""

from __future__ import annotations

import itertools
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from causalci.bnmodel import DiscreteBayesNet, save_bif  # noqa: E402

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "networks")


# ---------------------------------------------------------------------------
# CHILD: 20 nodes, 25 edges


def build_child() -> DiscreteBayesNet:
    states = {
        "BirthAsphyxia": ("yes", "no"),
        "Disease": ("PFC", "TGA", "Fallot", "PAIVS", "TAPVD", "Lung"),
        "Age": ("0-3_days", "4-10_days", "11-30_days"),
        "LVH": ("yes", "no"),
        "DuctFlow": ("Lt_to_Rt", "None", "Rt_to_Lt"),
        "CardiacMixing": ("None", "Mild", "Complete", "Transp."),
        "LungParench": ("Normal", "Congested", "Abnormal"),
        "LungFlow": ("Normal", "Low", "High"),
        "Sick": ("yes", "no"),
        "HypDistrib": ("Equal", "Unequal"),
        "HypoxiaInO2": ("Mild", "Moderate", "Severe"),
        "CO2": ("Normal", "Low", "High"),
        "ChestXray": ("Normal", "Oligaemic", "Plethoric", "Grd_Glass", "Asy/Patchy"),
        "Grunting": ("yes", "no"),
        "LVHreport": ("yes", "no"),
        "LowerBodyO2": ("<5", "5-12", "12+"),
        "RUQO2": ("<5", "5-12", "12+"),
        "CO2Report": ("<7.5", ">=7.5"),
        "XrayReport": ("Normal", "Oligaemic", "Plethoric", "Grd_Glass", "Asy/Patchy"),
        "GruntingReport": ("yes", "no"),
    }
    parents = {
        "BirthAsphyxia": (),
        "Disease": ("BirthAsphyxia",),
        "Age": ("Disease", "Sick"),
        "LVH": ("Disease",),
        "DuctFlow": ("Disease",),
        "CardiacMixing": ("Disease",),
        "LungParench": ("Disease",),
        "LungFlow": ("Disease",),
        "Sick": ("Disease",),
        "HypDistrib": ("DuctFlow", "CardiacMixing"),
        "HypoxiaInO2": ("CardiacMixing", "LungParench"),
        "CO2": ("LungParench",),
        "ChestXray": ("LungParench", "LungFlow"),
        "Grunting": ("LungParench", "Sick"),
        "LVHreport": ("LVH",),
        "LowerBodyO2": ("HypDistrib", "HypoxiaInO2"),
        "RUQO2": ("HypoxiaInO2",),
        "CO2Report": ("CO2",),
        "XrayReport": ("ChestXray",),
        "GruntingReport": ("Grunting",),
    }
    cpt = {
        "BirthAsphyxia": [[0.1, 0.9]],
        "Disease": [
            [0.20, 0.30, 0.25, 0.15, 0.05, 0.05],
            [0.03061224, 0.33673469, 0.29591837, 0.23469388, 0.05102041, 0.05102041],
        ],
        # rows: (Disease, Sick), Sick fastest
        "Age": [
            [0.95, 0.03, 0.02], [0.85, 0.10, 0.05],
            [0.80, 0.15, 0.05], [0.70, 0.20, 0.10],
            [0.25, 0.25, 0.50], [0.20, 0.30, 0.50],
            [0.90, 0.08, 0.02], [0.80, 0.15, 0.05],
            [0.60, 0.30, 0.10], [0.50, 0.35, 0.15],
            [0.80, 0.15, 0.05], [0.70, 0.20, 0.10],
        ],
        "LVH": [
            [0.10, 0.90], [0.10, 0.90], [0.10, 0.90],
            [0.90, 0.10], [0.05, 0.95], [0.10, 0.90],
        ],
        "DuctFlow": [
            [0.15, 0.05, 0.80], [0.10, 0.80, 0.10], [0.80, 0.20, 0.00],
            [1.00, 0.00, 0.00], [0.33, 0.33, 0.34], [0.20, 0.40, 0.40],
        ],
        "CardiacMixing": [
            [0.40, 0.43, 0.15, 0.02], [0.02, 0.09, 0.09, 0.80],
            [0.02, 0.16, 0.80, 0.02], [0.01, 0.02, 0.95, 0.02],
            [0.01, 0.03, 0.95, 0.01], [0.40, 0.53, 0.05, 0.02],
        ],
        "LungParench": [
            [0.60, 0.10, 0.30], [0.80, 0.05, 0.15], [0.80, 0.05, 0.15],
            [0.80, 0.05, 0.15], [0.10, 0.60, 0.30], [0.03, 0.25, 0.72],
        ],
        "LungFlow": [
            [0.30, 0.05, 0.65], [0.20, 0.05, 0.75], [0.15, 0.80, 0.05],
            [0.10, 0.85, 0.05], [0.30, 0.10, 0.60], [0.70, 0.10, 0.20],
        ],
        "Sick": [
            [0.40, 0.60], [0.30, 0.70], [0.20, 0.80],
            [0.30, 0.70], [0.70, 0.30], [0.70, 0.30],
        ],
        # rows: (DuctFlow, CardiacMixing), CardiacMixing fastest
        "HypDistrib": [
            [0.95, 0.05], [0.95, 0.05], [0.95, 0.05], [0.95, 0.05],
            [0.95, 0.05], [0.95, 0.05], [0.95, 0.05], [0.95, 0.05],
            [0.05, 0.95], [0.50, 0.50], [0.95, 0.05], [0.50, 0.50],
        ],
        # rows: (CardiacMixing, LungParench), LungParench fastest
        "HypoxiaInO2": [
            [0.93, 0.05, 0.02], [0.15, 0.80, 0.05], [0.10, 0.75, 0.15],
            [0.90, 0.08, 0.02], [0.15, 0.75, 0.10], [0.10, 0.65, 0.25],
            [0.10, 0.70, 0.20], [0.05, 0.65, 0.30], [0.05, 0.45, 0.50],
            [0.02, 0.18, 0.80], [0.02, 0.18, 0.80], [0.02, 0.18, 0.80],
        ],
        "CO2": [
            [0.80, 0.10, 0.10], [0.65, 0.05, 0.30], [0.45, 0.05, 0.50],
        ],
        # rows: (LungParench, LungFlow), LungFlow fastest
        "ChestXray": [
            [0.90, 0.03, 0.03, 0.01, 0.03], [0.14, 0.80, 0.02, 0.02, 0.02],
            [0.15, 0.01, 0.79, 0.04, 0.01],
            [0.05, 0.02, 0.15, 0.70, 0.08], [0.05, 0.22, 0.08, 0.55, 0.10],
            [0.05, 0.02, 0.40, 0.45, 0.08],
            [0.05, 0.05, 0.05, 0.05, 0.80], [0.05, 0.15, 0.05, 0.05, 0.70],
            [0.05, 0.05, 0.20, 0.05, 0.65],
        ],
        # rows: (LungParench, Sick), Sick fastest
        "Grunting": [
            [0.20, 0.80], [0.05, 0.95], [0.40, 0.60],
            [0.20, 0.80], [0.80, 0.20], [0.60, 0.40],
        ],
        "LVHreport": [[0.90, 0.10], [0.05, 0.95]],
        # rows: (HypDistrib, HypoxiaInO2), HypoxiaInO2 fastest
        "LowerBodyO2": [
            [0.10, 0.30, 0.60], [0.30, 0.60, 0.10], [0.50, 0.45, 0.05],
            [0.40, 0.50, 0.10], [0.50, 0.45, 0.05], [0.60, 0.35, 0.05],
        ],
        "RUQO2": [
            [0.10, 0.30, 0.60], [0.30, 0.60, 0.10], [0.50, 0.45, 0.05],
        ],
        "CO2Report": [[0.90, 0.10], [0.90, 0.10], [0.10, 0.90]],
        "XrayReport": [
            [0.80, 0.06, 0.06, 0.02, 0.06], [0.10, 0.80, 0.02, 0.02, 0.06],
            [0.10, 0.02, 0.80, 0.02, 0.06], [0.08, 0.02, 0.10, 0.60, 0.20],
            [0.08, 0.02, 0.10, 0.10, 0.70],
        ],
        "GruntingReport": [[0.80, 0.20], [0.10, 0.90]],
    }
    nodes = list(states)
    cpt = {k: np.asarray(v, dtype=np.float64) for k, v in cpt.items()}
    return DiscreteBayesNet(nodes, states, parents, cpt)


# ---------------------------------------------------------------------------
# Generated conditionals for the larger reconstructions


def _mechanism_rows(child_card: int, parent_cards: list[int],
                    rng: np.random.Generator) -> np.ndarray:
    """Near-deterministic monotone tables: each parent configuration pushes
    one dominant child state, the rest of the mass is a noisy spread."""
    if not parent_cards:
        return rng.dirichlet(np.full(child_card, 2.0)).reshape(1, child_card)
    rows = []
    # Random per-parent polarity so mechanisms are not all aligned.
    signs = rng.choice([-1.0, 1.0], size=len(parent_cards))
    weights = rng.uniform(0.5, 1.5, size=len(parent_cards))
    for cfg in itertools.product(*[range(c) for c in parent_cards]):
        pos = 0.0
        wsum = 0.0
        for s, c, sg, w in zip(cfg, parent_cards, signs, weights):
            rel = s / (c - 1) if c > 1 else 0.5
            pos += w * (rel if sg > 0 else 1.0 - rel)
            wsum += w
        pos /= wsum
        dominant = min(int(round(pos * (child_card - 1))), child_card - 1)
        strength = rng.uniform(0.72, 0.92)
        noise = rng.dirichlet(np.full(child_card, 0.5))
        row = (1.0 - strength) * noise
        row[dominant] += strength
        rows.append(row / row.sum())
    return np.asarray(rows)


def _assemble(nodes, states, parents, priors, seed) -> DiscreteBayesNet:
    rng = np.random.default_rng(seed)
    cpt = {}
    for n in nodes:
        if not parents[n]:
            if n in priors:
                cpt[n] = np.asarray([priors[n]], dtype=np.float64)
            else:
                cpt[n] = _mechanism_rows(len(states[n]), [], rng)
        else:
            cpt[n] = _mechanism_rows(len(states[n]),
                                     [len(states[p]) for p in parents[n]], rng)
    return DiscreteBayesNet(nodes, states, parents, cpt)


# ---------------------------------------------------------------------------
# INSURANCE: 27 nodes, 52 edges


def build_insurance() -> DiscreteBayesNet:
    card = {
        "Age": 3, "SocioEcon": 4, "GoodStudent": 2, "RiskAversion": 4,
        "VehicleYear": 2, "MakeModel": 5, "Mileage": 4, "Antilock": 2,
        "DrivingSkill": 3, "SeniorTrain": 2, "DrivQuality": 3, "DrivHist": 3,
        "RuggedAuto": 3, "CarValue": 5, "Airbag": 2, "Accident": 4,
        "ThisCarDam": 4, "ThisCarCost": 4, "Theft": 2, "HomeBase": 4,
        "AntiTheft": 2, "PropCost": 4, "OtherCarCost": 4, "OtherCar": 2,
        "MedCost": 4, "Cushioning": 4, "ILiCost": 4,
    }
    parents = {
        "Age": (), "Mileage": (),
        "SocioEcon": ("Age",),
        "GoodStudent": ("Age", "SocioEcon"),
        "RiskAversion": ("Age", "SocioEcon"),
        "OtherCar": ("SocioEcon",),
        "VehicleYear": ("SocioEcon", "RiskAversion"),
        "MakeModel": ("SocioEcon", "RiskAversion"),
        "SeniorTrain": ("Age", "RiskAversion"),
        "DrivingSkill": ("Age", "SeniorTrain"),
        "DrivQuality": ("DrivingSkill", "RiskAversion"),
        "DrivHist": ("DrivingSkill", "RiskAversion"),
        "RuggedAuto": ("MakeModel", "VehicleYear"),
        "Antilock": ("MakeModel", "VehicleYear"),
        "CarValue": ("MakeModel", "VehicleYear", "Mileage"),
        "Airbag": ("MakeModel", "VehicleYear"),
        "Accident": ("Antilock", "Mileage", "DrivQuality"),
        "ThisCarDam": ("Accident", "RuggedAuto"),
        "ThisCarCost": ("ThisCarDam", "CarValue", "Theft"),
        "Theft": ("CarValue", "HomeBase", "AntiTheft"),
        "HomeBase": ("SocioEcon", "RiskAversion"),
        "AntiTheft": ("SocioEcon", "RiskAversion"),
        "PropCost": ("ThisCarCost", "OtherCarCost"),
        "OtherCarCost": ("Accident", "RuggedAuto"),
        "MedCost": ("Accident", "Age", "Cushioning"),
        "Cushioning": ("RuggedAuto", "Airbag"),
        "ILiCost": ("Accident",),
    }
    nodes = list(card)
    states = {n: tuple(f"s{i}" for i in range(card[n])) for n in nodes}
    priors = {
        "Age": [0.2, 0.6, 0.2],
        "Mileage": [0.1, 0.35, 0.35, 0.2],
    }
    return _assemble(nodes, states, parents, priors, seed=20_240_101)


# ---------------------------------------------------------------------------
# ALARM: 37 nodes, 46 edges


def build_alarm() -> DiscreteBayesNet:
    card = {
        "HISTORY": 2, "CVP": 3, "PCWP": 3, "HYPOVOLEMIA": 2, "LVEDVOLUME": 3,
        "LVFAILURE": 2, "STROKEVOLUME": 3, "ERRLOWOUTPUT": 2, "HRBP": 3,
        "HREKG": 3, "ERRCAUTER": 2, "HRSAT": 3, "INSUFFANESTH": 2,
        "ANAPHYLAXIS": 2, "TPR": 3, "EXPCO2": 4, "KINKEDTUBE": 2, "MINVOL": 4,
        "FIO2": 2, "PVSAT": 3, "SAO2": 3, "PAP": 3, "PULMEMBOLUS": 2,
        "SHUNT": 2, "INTUBATION": 3, "PRESS": 4, "DISCONNECT": 2,
        "MINVOLSET": 3, "VENTMACH": 4, "VENTTUBE": 4, "VENTLUNG": 4,
        "VENTALV": 4, "ARTCO2": 3, "CATECHOL": 2, "HR": 3, "CO": 3, "BP": 3,
    }
    parents = {
        "HISTORY": ("LVFAILURE",),
        "CVP": ("LVEDVOLUME",),
        "PCWP": ("LVEDVOLUME",),
        "HYPOVOLEMIA": (),
        "LVEDVOLUME": ("HYPOVOLEMIA", "LVFAILURE"),
        "LVFAILURE": (),
        "STROKEVOLUME": ("HYPOVOLEMIA", "LVFAILURE"),
        "ERRLOWOUTPUT": (),
        "HRBP": ("ERRLOWOUTPUT", "HR"),
        "HREKG": ("ERRCAUTER", "HR"),
        "ERRCAUTER": (),
        "HRSAT": ("ERRCAUTER", "HR"),
        "INSUFFANESTH": (),
        "ANAPHYLAXIS": (),
        "TPR": ("ANAPHYLAXIS",),
        "EXPCO2": ("ARTCO2", "VENTLUNG"),
        "KINKEDTUBE": (),
        "MINVOL": ("INTUBATION", "VENTLUNG"),
        "FIO2": (),
        "PVSAT": ("FIO2", "VENTALV"),
        "SAO2": ("PVSAT", "SHUNT"),
        "PAP": ("PULMEMBOLUS",),
        "PULMEMBOLUS": (),
        "SHUNT": ("INTUBATION", "PULMEMBOLUS"),
        "INTUBATION": (),
        "PRESS": ("INTUBATION", "KINKEDTUBE", "VENTTUBE"),
        "DISCONNECT": (),
        "MINVOLSET": (),
        "VENTMACH": ("MINVOLSET",),
        "VENTTUBE": ("DISCONNECT", "VENTMACH"),
        "VENTLUNG": ("INTUBATION", "KINKEDTUBE", "VENTTUBE"),
        "VENTALV": ("INTUBATION", "VENTLUNG"),
        "ARTCO2": ("VENTALV",),
        "CATECHOL": ("ARTCO2", "INSUFFANESTH", "SAO2", "TPR"),
        "HR": ("CATECHOL",),
        "CO": ("HR", "STROKEVOLUME"),
        "BP": ("CO", "TPR"),
    }
    nodes = list(card)
    states = {n: tuple(f"s{i}" for i in range(card[n])) for n in nodes}
    priors = {
        "HYPOVOLEMIA": [0.2, 0.8],
        "LVFAILURE": [0.05, 0.95],
        "ERRLOWOUTPUT": [0.05, 0.95],
        "ERRCAUTER": [0.1, 0.9],
        "INSUFFANESTH": [0.1, 0.9],
        "ANAPHYLAXIS": [0.01, 0.99],
        "KINKEDTUBE": [0.04, 0.96],
        "DISCONNECT": [0.1, 0.9],
        "PULMEMBOLUS": [0.01, 0.99],
        "FIO2": [0.05, 0.95],
        "INTUBATION": [0.92, 0.03, 0.05],
        "MINVOLSET": [0.05, 0.9, 0.05],
    }
    return _assemble(nodes, states, parents, priors, seed=20_240_102)


# ---------------------------------------------------------------------------
# HAILFINDER stand-in: 56 nodes, 66 edges, mixed cardinalities up to 11


def build_hailfinder() -> DiscreteBayesNet:
    rng = np.random.default_rng(20_240_103)
    n_nodes, n_edges = 56, 66
    nodes = [f"H{i:02d}" for i in range(n_nodes)]
    profile = [2] * 14 + [3] * 18 + [4] * 16 + [5] * 4 + [6] * 2 + [11] * 2
    cards = list(rng.permutation(profile))
    states = {n: tuple(f"s{i}" for i in range(c)) for n, c in zip(nodes, cards)}

    parent_lists: dict[str, list[str]] = {n: [] for n in nodes}
    edges = 0
    guard = 0
    while edges < n_edges and guard < 100_000:
        guard += 1
        j = int(rng.integers(1, n_nodes))
        i = int(rng.integers(0, j))
        child, parent = nodes[j], nodes[i]
        if parent in parent_lists[child] or len(parent_lists[child]) >= 4:
            continue
        cfg = int(np.prod([cards[nodes.index(p)]
                           for p in parent_lists[child] + [parent]]))
        if cfg * cards[j] > 1600:
            continue
        parent_lists[child].append(parent)
        edges += 1
    if edges != n_edges:
        raise RuntimeError("failed to place all edges")
    parents = {n: tuple(parent_lists[n]) for n in nodes}
    return _assemble(nodes, states, parents, {}, seed=20_240_104)


# ---------------------------------------------------------------------------
# Tiled CHILD variants


def build_child_tiled(copies: int, seed: int) -> DiscreteBayesNet:
    base = build_child()
    rng = np.random.default_rng(seed)
    nodes = []
    states = {}
    parents = {}
    cpt = {}
    for k in range(1, copies + 1):
        for n in base.nodes:
            name = f"{n}_{k}"
            nodes.append(name)
            states[name] = base.states[n]
            parents[name] = tuple(f"{p}_{k}" for p in base.parents[n])
            cpt[name] = base.cpt[n].copy()
    # Two junction edges per adjacent pair of tiles: the previous tile's
    # Sick drives the next root, and its LowerBodyO2 modulates Sick.
    for k in range(1, copies):
        root = f"BirthAsphyxia_{k + 1}"
        parents[root] = (f"Sick_{k}",)
        cpt[root] = np.asarray([[0.20, 0.80], [0.08, 0.92]])

        child = f"Sick_{k + 1}"
        extra = f"LowerBodyO2_{k}"
        old = cpt[child]
        mods = np.asarray([[1.6, 0.8], [1.0, 1.0], [0.7, 1.2]])
        rows = []
        for r in range(old.shape[0]):
            for m in range(mods.shape[0]):
                row = old[r] * mods[m]
                rows.append(row / row.sum())
        parents[child] = parents[child] + (extra,)
        cpt[child] = np.asarray(rows)
    del rng
    return DiscreteBayesNet(nodes, states, parents, cpt)


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    builders = {
        "child": build_child,
        "insurance": build_insurance,
        "alarm": build_alarm,
        "hailfinder": build_hailfinder,
        "child3": lambda: build_child_tiled(3, 20_240_105),
        "child5": lambda: build_child_tiled(5, 20_240_106),
    }
    for name, build in builders.items():
        net = build()
        n_edges = sum(len(p) for p in net.parents.values())
        path = os.path.join(OUT_DIR, f"{name}.bif")
        save_bif(net, path, name=name)
        print(f"{name}: {len(net.nodes)} nodes, {n_edges} edges -> {path}")


if __name__ == "__main__":
    main()
