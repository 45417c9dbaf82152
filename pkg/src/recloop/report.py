"""Report generation: session logs + EEG recordings -> evaluation tables.

Outputs four CSVs into a report directory:

* table1.csv - per-group Pearson matrices over the questionnaire scales
  (significance-masked entries are blank),
* table2.csv - per electrode x band Spearman correlation with efficacy,
  combined across subjects by Fisher's method,
* table3.csv - leave-one-out F1 grid: feature kind x classifier x band,
* fig10.csv  - per-band lateralization changes and the between-group t-test.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import (ClassifierSpec, LabeledTrial, loocv_f1, pearson_matrix,
                       rating_to_label, spearman_fisher, two_sample_t)
from .eeg import BANDS, EegEpoch, Montage, load_session_eeg, trial_features
from .efficacy import (LogisticMode, SatisfactionMark, Verdict, efficacy,
                       satisfaction_count)

SCALE_NAMES = ["xi", "mental_demand", "effort", "performance",
               "valence", "dominance", "frustration"]


@dataclass
class SessionTrials:
    """Everything `analyze` needs from one session's log."""

    session_id: str
    group: str
    xi: dict[int, float]
    assessments: dict[int, dict]


def parse_session_log(path: str | Path) -> SessionTrials:
    """Extract per-trial efficacy inputs and assessments from a JSONL log."""
    marks: dict[int, list[SatisfactionMark]] = {}
    understanding: dict[int, float] = {}
    assessments: dict[int, dict] = {}
    group = "unknown"
    k, mode = 90.0, LogisticMode.LITERAL
    session_id = Path(path).stem
    trials_seen: set[int] = set()

    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            event = json.loads(line)
            kind, trial, pay = event["kind"], event["trial"], event["payload"]
            trials_seen.add(trial)
            if kind == "created":
                group = pay["group"]
                opts = pay.get("options", {})
                k = float(opts.get("efficacy_k", k))
                mode = LogisticMode(opts.get("efficacy_mode", mode.value))
                session_id = event["session"]
            elif kind == "satisfaction":
                marks.setdefault(trial, []).append(SatisfactionMark(
                    index=pay["item_id"], verdict=Verdict(pay["verdict"])))
            elif kind == "quiz":
                x = 0.0
                for e in pay["items"]:
                    said_genuine = e["judgment"] == "correct"
                    cr = 1 if said_genuine == e["is_genuine"] else -1
                    x += cr * e["confidence"]
                understanding[trial] = x
            elif kind == "assessment":
                assessments[trial] = pay

    xi = {}
    for trial in sorted(trials_seen):
        a = satisfaction_count(marks.get(trial, []))
        x = understanding.get(trial, 0.0)
        xi[trial] = efficacy(a=a, x=x, k=k, mode=mode, trial=trial).xi
    return SessionTrials(session_id=session_id, group=group, xi=xi,
                         assessments=assessments)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _table1(sessions: list[SessionTrials], out: Path, alpha: float = 0.01) -> None:
    rows = []
    for group in sorted({s.group for s in sessions}):
        table = []
        for s in sessions:
            if s.group != group:
                continue
            for trial, sa in s.assessments.items():
                if trial not in s.xi:
                    continue
                table.append([s.xi[trial], sa["mental_demand"], sa["effort"],
                              sa["performance"], sa["valence"], sa["dominance"],
                              sa["frustration"]])
        if len(table) < 3:
            continue
        _, _, masked = pearson_matrix(np.array(table), alpha=alpha)
        for i, name in enumerate(SCALE_NAMES):
            row = [group, name]
            for j in range(len(SCALE_NAMES)):
                v = masked[i, j]
                row.append("" if np.isnan(v) else f"{v:.3f}")
            rows.append(row)
    _write_csv(out / "table1.csv", ["group", "scale"] + SCALE_NAMES, rows)


def _table2(features_by_session: dict[str, list], xi_by_session: dict[str, list],
            out: Path, alpha: float = 0.01) -> None:
    electrodes = sorted({key[1]
                         for trials in features_by_session.values()
                         for key in trials[0].power})
    rows = []
    for band in BANDS:
        for elec in electrodes:
            series = []
            for sid, trials in features_by_session.items():
                xs = np.array([t.power[(band, elec)] for t in trials])
                ys = np.array(xi_by_session[sid])
                if xs.size >= 3:
                    series.append((xs, ys))
            if not series:
                continue
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    row = spearman_fisher(series)
            except ValueError:
                continue
            rows.append([band, elec, f"{row.mean_r:.3f}", f"{row.min_r:.3f}",
                         f"{row.max_r:.3f}", f"{row.p:.6g}",
                         int(row.p < alpha)])
    _write_csv(out / "table2.csv",
               ["band", "electrode", "R", "R_minus", "R_plus", "p",
                "significant"], rows)


def _table3(features_by_session: dict[str, list],
            labels_by_session: dict[str, list], out: Path) -> None:
    rows = []
    for kind in ("hasym", "de", "ade"):
        for clf_kind in ("svm", "knn"):
            for band in BANDS:
                f1s = []
                for sid, trials in features_by_session.items():
                    labels = labels_by_session[sid]
                    usable = [(t, l) for t, l in zip(trials, labels)
                              if l is not None]
                    if len(usable) < 3:
                        continue
                    if len({l for _, l in usable}) < 2:
                        continue
                    data = [LabeledTrial(features=t.vector(kind, band), label=l)
                            for t, l in usable]
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        f1s.append(loocv_f1(data, ClassifierSpec(kind=clf_kind)))
                rows.append([kind, clf_kind, band,
                             f"{np.mean(f1s):.3f}" if f1s else "",
                             len(f1s)])
    _write_csv(out / "table3.csv",
               ["feature", "classifier", "band", "mean_f1", "n_subjects"], rows)


def _fig10(epochs_by_session: dict[str, list[EegEpoch]],
           groups: dict[str, str], montage: Montage, out: Path) -> None:
    from .eeg import lateralized_power_change
    rows = []
    for band in BANDS.values():
        changes: dict[str, list[float]] = {}
        for sid, epochs in epochs_by_session.items():
            if len(epochs) < 2:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                change = lateralized_power_change(epochs, band, montage)
            changes.setdefault(groups[sid], []).append(change)
        names = sorted(changes)
        row = [band.name]
        for g in names:
            row.append(f"{np.mean(changes[g]):.4f}")
        if len(names) == 2 and all(len(changes[g]) >= 2 for g in names):
            t, p = two_sample_t(np.array(changes[names[0]]),
                                np.array(changes[names[1]]))
            row += [f"{t:.3f}", f"{p:.6g}"]
        else:
            row += ["", ""]
        rows.append(row)
    groups_present = sorted(set(groups.values()))
    header = (["band"] + [f"mean_change_{g}" for g in groups_present]
              + ["t", "p"])
    _write_csv(out / "fig10.csv", header, rows)


def analyze(sessions_dir: str | Path, eeg_dir: str | Path | None,
            out_dir: str | Path) -> dict:
    """Run the full report pipeline; returns a small manifest of outputs."""
    sessions_dir = Path(sessions_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    logs = sorted(sessions_dir.glob("*.jsonl"))
    if not logs:
        raise FileNotFoundError(f"no session logs in {sessions_dir}")
    sessions = [parse_session_log(p) for p in logs]
    _table1(sessions, out)

    manifest = {"sessions": len(sessions), "tables": ["table1.csv"]}
    if eeg_dir is None:
        return manifest

    eeg_dir = Path(eeg_dir)
    features_by_session: dict[str, list] = {}
    epochs_by_session: dict[str, list[EegEpoch]] = {}
    xi_by_session: dict[str, list[float]] = {}
    labels_by_session: dict[str, list] = {}
    groups: dict[str, str] = {}
    montage = Montage()
    for s in sessions:
        csv_path = eeg_dir / f"{s.session_id}.csv"
        sidecar = eeg_dir / f"{s.session_id}.json"
        if not csv_path.exists() or not sidecar.exists():
            continue
        epochs, montage = load_session_eeg(csv_path, sidecar)
        trials = sorted(s.xi)
        epochs = [e for e in epochs if e.trial_id in s.xi]
        if len(epochs) != len(trials):
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            features_by_session[s.session_id] = [
                trial_features(e, montage) for e in epochs]
        epochs_by_session[s.session_id] = epochs
        xi_by_session[s.session_id] = [s.xi[t] for t in trials]
        labels_by_session[s.session_id] = [
            rating_to_label(s.assessments[t]["efficacy_self_rating"])
            if t in s.assessments else None
            for t in trials]
        groups[s.session_id] = s.group

    if features_by_session:
        _table2(features_by_session, xi_by_session, out)
        _table3(features_by_session, labels_by_session, out)
        _fig10(epochs_by_session, groups, montage, out)
        manifest["tables"] += ["table2.csv", "table3.csv", "fig10.csv"]
        manifest["eeg_sessions"] = len(features_by_session)
    return manifest
