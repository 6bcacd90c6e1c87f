from genlearn.data.dataset import SequenceDataset
from genlearn.utils.exceptions import InvalidArgumentError


def read_sequence_file(file: str, V: int = None) -> SequenceDataset:
    """
    Reads a sequence file (one sequence per line, space-separated integer symbols) and returns a
    SequenceDataset. Blank lines are skipped.

    Parameters
    ----------
    file: str
        Path to file to be read
    V: int (default=None)
        The alphabet size (None -> 1 + the largest symbol in the file)
    """
    with open(file) as f:
        rows = [[int(tok) for tok in line.split()] for line in f if line.strip()]
    if not rows:
        raise InvalidArgumentError(f"The file '{file}' contains no sequences.")
    if len({len(r) for r in rows}) != 1:
        raise InvalidArgumentError("Every sequence in the file must have the same length.")
    if V is None:
        V = 1 + max(max(r) for r in rows)
    return SequenceDataset(rows, V)


def write_sequence_file(nfile: str, dataset: SequenceDataset) -> None:
    """
    Writes a SequenceDataset to a text file, one sequence per line. Returns None.

    Parameters
    ----------
    nfile: str
        Path to file to be written
    dataset: SequenceDataset
        The sequences to write
    """
    with open(nfile, "w", newline="\n") as f:
        for seq in dataset:
            f.write(" ".join(str(s) for s in seq) + "\n")
