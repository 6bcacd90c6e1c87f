import numpy as np
import pandas as pd

from genlearn.data.dataset import Dataset


def read_csv_file(file: str, label: bool, sep: str = ",") -> Dataset:
    """
    Reads a csv file (header row with column names) and returns a Dataset object. When 'label'
    is True the last column holds the targets.

    Parameters
    ----------
    file: str
        Path to file to be read
    label: bool
        Representative of the presence of a target column in the file
    sep: str (default=",")
        The separator used in the file
    """
    df = pd.read_csv(file, sep=sep)
    col_names = [str(c) for c in df.columns]
    if label:
        X = df.iloc[:, :-1].to_numpy(dtype=float)
        y = df.iloc[:, -1].to_numpy()
        *name_feats, name_lab = col_names
    else:
        X = df.to_numpy(dtype=float)
        name_feats = col_names
        y, name_lab = None, None
    return Dataset(X, y, name_feats, name_lab)


def write_csv_file(nfile: str, dataset: Dataset, sep: str = ",") -> None:
    """
    Writes a Dataset object to a csv file (header row, no index column, '.' decimal). The target
    column, if present, is written last. Returns None.

    Parameters
    ----------
    nfile: str
        Path to file to be written
    dataset: Dataset
        A Dataset object
    sep: str (default=",")
        The separator to be used in the file
    """
    df = pd.DataFrame(dataset.X, columns=dataset.features)
    if dataset.has_label():
        df[dataset.label] = dataset.y
    df.to_csv(nfile, sep=sep, index=False, lineterminator="\n")


def write_samples_csv(nfile: str, samples: np.ndarray, prefix: str = "x") -> None:
    """
    Writes a matrix of samples (one sample per row) to a csv file with columns x1, x2, ...

    Parameters
    ----------
    nfile: str
        Path to file to be written
    samples: np.ndarray
        The samples (n, K)
    prefix: str (default="x")
        Prefix of the column names
    """
    samples = np.atleast_2d(samples)
    write_csv_file(nfile, Dataset(samples, features=[f"{prefix}{i+1}" for i in range(samples.shape[1])]))
