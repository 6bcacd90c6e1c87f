import argparse

import matplotlib.pyplot as plt
import pandas as pd


def read_metrics(path: str) -> pd.DataFrame:
    """
    Reads a metrics.jsonl file written by a genlearn training command.

    Parameters
    ----------
    path: str
        Path to the metrics file (one JSON object per line)
    """
    metrics = pd.read_json(path, lines=True)
    if metrics.empty:
        raise ValueError(f"'{path}' holds no metric rows.")
    return metrics


def plot_metrics(metrics: pd.DataFrame, title: str = "") -> None:
    """
    Draws one graph per numeric column of <metrics> against the step (or epoch) column.

    Parameters
    ----------
    metrics: pd.DataFrame
        The metric rows
    title: str (default="")
        Prefix of every graph title
    """
    xcol = next((col for col in ("step", "epoch") if col in metrics.columns), None)
    x = metrics[xcol] if xcol is not None else pd.Series(range(len(metrics)))
    # "t" is the sampled diffusion timestep, not an objective
    ycols = [col for col in metrics.select_dtypes("number").columns if col not in (xcol, "t")]
    for col in ycols:
        plt.plot(x, metrics[col], linestyle="-", color="blue")
        plt.title(f"{title} {col}".strip()), plt.xlabel(xcol or "row"), plt.ylabel(col)
        plt.show()


if __name__ == "__main__":

    parser = argparse.ArgumentParser(description="Plot the metric traces of genlearn training runs.")
    parser.add_argument("paths", nargs="+", help="metrics.jsonl files")
    args = parser.parse_args()

    for path in args.paths:
        plot_metrics(read_metrics(path), title=path)
