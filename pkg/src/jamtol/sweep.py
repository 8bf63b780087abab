"""Parameter sweeps producing CSV tables of outage probabilities and capabilities"""

import hashlib
import itertools as it
import json
import logging
import math
import multiprocessing as mp
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from tqdm.auto import tqdm

from .analytic import sop, top
from .capability import Constraints, capability
from .channel import NetworkConfig, Scheme
from .montecarlo import SimJob, default_n_jobs, estimate
from .specialfn import QuadratureError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


# Sweepable parameters, in the order they vary across the rows
AXES: Tuple[str, ...] = ("n", "m", "tau", "gamma", "gamma_e", "eps_t", "eps_s")
INTEGER_AXES: Tuple[str, ...] = ("n", "m")

# Values of parameters a sweep leaves out
DEFAULTS: Dict[str, float] = dict(gamma=10.0, gamma_e=0.5, m=0)

# Parameters each output needs
OUTPUTS: Dict[str, Tuple[str, ...]] = dict(
    top_analytic=("n", "gamma", "tau"),
    sop_analytic=("n", "m", "tau", "gamma_e"),
    top_mc=("n", "m", "tau", "gamma", "gamma_e"),
    sop_mc=("n", "m", "tau", "gamma", "gamma_e"),
    capability=("n", "gamma", "gamma_e", "eps_t", "eps_s"),
)

# Columns each output adds to the table
OUTPUT_COLUMNS: Dict[str, Tuple[str, ...]] = dict(
    top_analytic=("top_analytic",),
    sop_analytic=("sop_analytic",),
    top_mc=("top_mc", "top_mc_stderr", "trials"),
    sop_mc=("sop_mc", "sop_mc_stderr", "trials"),
    capability=(
        "tau_opt",
        "m_star",
        "top_at_tau",
        "g_at_mstar",
        "g_at_mstar_plus1",
        "binding",
        "capped",
    ),
)


def expand_axis(name: str, value) -> List[Union[int, float]]:
    """The sorted grid values of a parameter.

    Args:
        name (str):
            The parameter name.
        value (number, list or dict):
            A single value, a list of values, or an inclusive range given as a dict
            with the keys `start`, `stop` and `step`.

    Returns:
        list:
            The distinct values in increasing order.

    Raises:
        ValueError:
            If the value cannot be read as a grid.

    Example:
        >>> expand_axis("n", dict(start=30, stop=80, step=10))
        [30, 40, 50, 60, 70, 80]
    """
    if isinstance(value, dict):
        if set(value) != {"start", "stop", "step"}:
            raise ValueError(
                f"The range of {name!r} needs exactly the keys start, stop and step, "
                f"got {sorted(value)}."
            )
        start, stop, step = value["start"], value["stop"], value["step"]
        if not step > 0 or stop < start:
            raise ValueError(f"The range of {name!r} is empty or has a bad step.")
        count = math.floor((stop - start) / step + 1e-9) + 1
        values = [round(start + index * step, 12) for index in range(count)]
    elif isinstance(value, list):
        if not value:
            raise ValueError(f"The grid of {name!r} is empty.")
        values = value
    else:
        values = [value]

    if not all(
        isinstance(entry, (int, float)) and not isinstance(entry, bool)
        for entry in values
    ):
        raise ValueError(f"The grid of {name!r} must be numeric, got {value!r}.")

    if name in INTEGER_AXES:
        if any(float(entry) != int(entry) for entry in values):
            raise ValueError(f"The grid of {name!r} must be integral, got {value!r}.")
        values = [int(entry) for entry in values]
    else:
        values = [float(entry) for entry in values]
    return sorted(set(values))


@dataclass(frozen=True)
class SweepSpec:
    """A parameter grid and the quantities to compute on it.

    Args:
        scheme (Scheme):
            The relay selection scheme.
        axes (dict):
            The grid values of each parameter, keyed by name.
        outputs (tuple of str):
            The quantities to compute, a subset of `OUTPUTS`.
        trials (int):
            The number of simulated transmissions per point for Monte-Carlo outputs.
        seed (int):
            The master seed shared by all points.
        renormalize (bool):
            Passed on to `top_opportunistic`.
        tau_override (bool):
            Whether the capability output is evaluated at the grid threshold instead of
            the largest threshold meeting the reliability constraint.
        digest (str):
            SHA-256 of the sweep spec file the grid was read from.
    """

    scheme: Scheme
    axes: Dict[str, List[Union[int, float]]]
    outputs: Tuple[str, ...]
    trials: int = 100_000
    seed: int = 0
    renormalize: bool = False
    tau_override: bool = False
    digest: str = field(default="", compare=False)

    @classmethod
    def from_dict(cls, data: dict, digest: str = "") -> "SweepSpec":
        """Parse a spec from its flat JSON structure.

        Args:
            data (dict):
                The parsed JSON object.
            digest (str, optional):
                Hash of the source text. Defaults to the empty string.

        Returns:
            SweepSpec:
                The sweep spec.

        Raises:
            ValueError:
                If a key is unknown, a grid is malformed or an output lacks a parameter.
        """
        if not isinstance(data, dict):
            raise ValueError("A sweep spec must be a JSON object.")
        known = set(AXES) | {
            "scheme",
            "outputs",
            "trials",
            "seed",
            "renormalize",
            "tau_override",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown keys in the sweep spec: {', '.join(unknown)}.")

        axes = {name: expand_axis(name, data[name]) for name in AXES if name in data}
        for name, default in DEFAULTS.items():
            axes.setdefault(name, [default])
        if not {name for name in AXES if name in data}:
            raise ValueError("A sweep spec needs at least one parameter.")

        outputs = data.get("outputs", ["top_analytic"])
        if isinstance(outputs, str):
            outputs = [outputs]
        for output in outputs:
            if output not in OUTPUTS:
                raise ValueError(
                    f"Unknown output {output!r}; expected some of {', '.join(OUTPUTS)}."
                )
            missing = [name for name in OUTPUTS[output] if name not in axes]
            if missing:
                raise ValueError(
                    f"Output {output!r} needs the parameter(s) {', '.join(missing)}."
                )

        trials = int(data.get("trials", 100_000))
        if trials < 1 and any(output.endswith("_mc") for output in outputs):
            raise ValueError(
                f"Monte-Carlo outputs need at least one trial, got {trials}."
            )

        tau_override = bool(data.get("tau_override", False))
        if "capability" in outputs:
            if tau_override and "tau" not in axes:
                raise ValueError("tau_override needs a tau parameter.")
            if not tau_override and "tau" in axes:
                logger.warning(
                    "The capability output solves for its own threshold and ignores "
                    "the tau parameter; set tau_override to evaluate it at tau instead"
                )

        return cls(
            scheme=Scheme.parse(data.get("scheme", Scheme.OPPORTUNISTIC)),
            axes=axes,
            outputs=tuple(dict.fromkeys(outputs)),
            trials=trials,
            seed=int(data.get("seed", 0)),
            renormalize=bool(data.get("renormalize", False)),
            tau_override=tau_override,
            digest=digest,
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SweepSpec":
        """Read a spec from a JSON file.

        Args:
            path (str or Path):
                The sweep spec file.

        Returns:
            SweepSpec:
                The sweep spec, with the hash of the file contents.

        Raises:
            OSError:
                If the file cannot be read.
            ValueError:
                If the file is not a valid spec.
        """
        raw = Path(path).read_bytes()
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ValueError(f"The sweep spec {path} is not valid JSON: {e}")
        return cls.from_dict(data, digest=hashlib.sha256(raw).hexdigest())

    @property
    def columns(self) -> List[str]:
        """The columns of the result table"""
        columns = ["scheme"] + [name for name in AXES if name in self.axes]
        for output in self.outputs:
            columns.extend(col for col in OUTPUT_COLUMNS[output] if col not in columns)
        return columns + ["error"]

    def grid(self) -> List[Dict[str, Union[int, float]]]:
        """The grid points in lexicographic order of `AXES`"""
        names = [name for name in AXES if name in self.axes]
        return [
            dict(zip(names, values))
            for values in it.product(*(self.axes[name] for name in names))
        ]


def evaluate_point(args: Tuple[SweepSpec, Dict[str, Union[int, float]], int]) -> dict:
    """Compute the requested outputs at a single grid point.

    Failures are recorded in the `error` entry instead of being raised, so that one bad
    point does not abort the sweep.

    Args:
        args (tuple):
            The sweep spec, the grid point and the number of Monte-Carlo workers.

    Returns:
        dict:
            The row of the result table.
    """
    spec, point, mc_jobs = args
    row = dict(scheme=spec.scheme.value, **point, error="")
    try:
        if "top_analytic" in spec.outputs:
            row["top_analytic"] = top(
                spec.scheme,
                point["n"],
                point["gamma"],
                point["tau"],
                renormalize=spec.renormalize,
            )
        if "sop_analytic" in spec.outputs:
            row["sop_analytic"] = sop(
                point["n"], point["m"], point["tau"], point["gamma_e"]
            )
        if "top_mc" in spec.outputs or "sop_mc" in spec.outputs:
            config = NetworkConfig(
                n=point["n"],
                m=point["m"],
                gamma=point["gamma"],
                gamma_e=point["gamma_e"],
                tau=point["tau"],
            )
            job = SimJob(config, spec.scheme, trials=spec.trials, master_seed=spec.seed)
            top_est, sop_est = estimate(job, n_jobs=mc_jobs)
            row["trials"] = spec.trials
            if "top_mc" in spec.outputs:
                row["top_mc"] = top_est.p_hat
                row["top_mc_stderr"] = top_est.stderr
            if "sop_mc" in spec.outputs:
                row["sop_mc"] = sop_est.p_hat
                row["sop_mc_stderr"] = sop_est.stderr
        if "capability" in spec.outputs:
            constraints = Constraints(eps_t=point["eps_t"], eps_s=point["eps_s"])
            result = capability(
                spec.scheme,
                point["n"],
                point["gamma"],
                point["gamma_e"],
                constraints,
                tau_override=point["tau"] if spec.tau_override else None,
                renormalize=spec.renormalize,
            ).to_dict()
            result.pop("scheme")
            row.update(result)
    except (ValueError, QuadratureError) as e:
        logger.warning(f"Grid point {point} failed: {e}")
        row["error"] = str(e)
    return row


def format_value(value) -> str:
    """Render a table cell, with floats in round-trippable fixed notation.

    Args:
        value:
            The cell value.

    Returns:
        str:
            The formatted cell; missing values become the empty string.

    Example:
        >>> format_value(0.1)
        '0.10000000000000001'
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return np.format_float_positional(
            float(value), precision=17, unique=False, fractional=False, trim="-"
        )
    return str(value)


def package_version() -> str:
    """The installed version of the package"""
    try:
        return version("jamtol")
    except PackageNotFoundError:
        return "unknown"


class Sweep:
    """Evaluate a sweep spec over its grid.

    Args:
        spec (SweepSpec):
            The sweep to run.
        n_jobs (int or None, optional):
            The number of worker processes. If None then `JAMTOL_N_JOBS` is used, or all
            but one CPU. Defaults to None.
        chunksize (int, optional):
            The number of grid points per pool task. Defaults to 1.
        verbose (bool, optional):
            Whether to log progress and show a progress bar. Defaults to True.

    Attributes:
        spec (SweepSpec): The sweep to run.
        n_jobs (int): The number of worker processes.
        chunksize (int): The number of grid points per pool task.
        verbose (bool): Whether extra information should be outputted.
    """

    def __init__(
        self,
        spec: SweepSpec,
        n_jobs: Optional[int] = None,
        chunksize: int = 1,
        verbose: bool = True,
    ):
        self.spec = spec
        self.n_jobs = default_n_jobs() if n_jobs is None else max(n_jobs, 1)
        self.chunksize = max(chunksize, 1)
        self.verbose = verbose

        if self.verbose:
            logger.setLevel(logging.INFO)
        else:
            logger.setLevel(logging.WARNING)

    def __repr__(self) -> str:
        return (
            f"Sweep(scheme={self.spec.scheme.value}, "
            f"points={len(self.spec.grid())}, outputs={list(self.spec.outputs)})"
        )

    def run(self) -> pd.DataFrame:
        """Evaluate every grid point.

        Returns:
            Pandas DataFrame:
                One row per grid point, in grid order, with the sweep spec columns.
        """
        points = self.spec.grid()
        logger.info(
            f"Evaluating {len(points):,} grid points on {self.n_jobs} worker(s)"
        )

        # A lone point gets all workers for its Monte-Carlo run instead
        if self.n_jobs == 1 or len(points) == 1:
            args = [(self.spec, point, self.n_jobs) for point in points]
            rows = [
                evaluate_point(arg)
                for arg in tqdm(args, desc="Sweeping", disable=not self.verbose)
            ]
        else:
            args = [(self.spec, point, 1) for point in points]
            with mp.Pool(processes=self.n_jobs) as pool:
                rows = list(
                    tqdm(
                        pool.imap(evaluate_point, args, chunksize=self.chunksize),
                        desc="Sweeping",
                        total=len(args),
                        disable=not self.verbose,
                    )
                )

        # Rows come back in grid order with every column of the sweep spec
        df = pd.DataFrame.from_records(rows).reindex(columns=self.spec.columns)
        failures = int((df.error != "").sum())
        if failures:
            logger.warning(f"{failures:,} of {len(df):,} grid points failed")
        return df

    def manifest(self) -> dict:
        """Provenance of the sweep output.

        Returns:
            dict:
                The sweep spec hash, seed, package version and columns.
        """
        return dict(
            spec_sha256=self.spec.digest,
            seed=self.spec.seed,
            version=package_version(),
            scheme=self.spec.scheme.value,
            outputs=list(self.spec.outputs),
            trials=self.spec.trials,
            columns=self.spec.columns,
        )

    def write(self, out: Union[str, Path]) -> Tuple[pd.DataFrame, Path]:
        """Run the sweep and write its table and manifest.

        The manifest is written next to the table, with the suffix `.manifest.json`.

        Args:
            out (str or Path):
                The path of the CSV file.

        Returns:
            pair:
                The result table and the path of the manifest.
        """
        out = Path(out)
        df = self.run()
        out.parent.mkdir(parents=True, exist_ok=True)
        formatted = df.apply(lambda column: column.map(format_value))
        formatted.to_csv(out, index=False, lineterminator="\n")

        manifest_path = out.with_suffix(".manifest.json")
        manifest_path.write_text(json.dumps(self.manifest(), indent=2, sort_keys=True))
        logger.info(f"Wrote {len(df):,} rows to {out} and its manifest")
        return df, manifest_path


def load_sweep(path: Union[str, Path], **kwargs) -> Sweep:
    """Shorthand for `Sweep(SweepSpec.from_file(path), **kwargs)`"""
    return Sweep(SweepSpec.from_file(path), **kwargs)
