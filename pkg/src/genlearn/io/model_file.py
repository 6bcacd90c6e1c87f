import json
from typing import Optional

from genlearn.utils.exceptions import InvalidModelError

# schema tag written in every model record, keyed by model kind
SCHEMAS = {"linreg": "genlearn.linreg/1",
           "logreg": "genlearn.logreg/1",
           "multiclass": "genlearn.multiclass/1",
           "mlp": "genlearn.mlp/1",
           "markov": "genlearn.markov/1",
           "neural_ar": "genlearn.neural_ar/1",
           "ppca": "genlearn.ppca/1",
           "gmm": "genlearn.gmm/1",
           "vae": "genlearn.vae/1",
           "diffusion": "genlearn.diffusion/1",
           "gan": "genlearn.gan/1",
           "score": "genlearn.score/1"}


def tag_record(kind: str, record: dict) -> dict:
    """
    Returns a copy of a model record carrying its kind and schema version.
    """
    return {"kind": kind, "schema": SCHEMAS[kind], **record}


def check_record(record: dict, kind: Optional[str] = None) -> str:
    """
    Validates the kind/schema header of a model record and returns its kind.

    Parameters
    ----------
    record: dict
        A decoded model record
    kind: str (default=None)
        The expected kind (None accepts any known kind)
    """
    found = record.get("kind")
    if found not in SCHEMAS:
        raise InvalidModelError(f"Unknown model kind {found!r}.")
    if kind is not None and found != kind:
        raise InvalidModelError(f"Expected a {kind!r} model, found {found!r}.")
    if record.get("schema") != SCHEMAS[found]:
        raise InvalidModelError(f"Unsupported schema {record.get('schema')!r} for kind {found!r}.")
    return found


def dumps_record(record: dict) -> str:
    """
    Serialises a record deterministically (sorted keys, repr floats) so reruns are byte-identical.
    """
    return json.dumps(record, sort_keys=True, indent=1) + "\n"


def write_model_file(nfile: str, record: dict) -> None:
    """
    Writes a tagged model record to a JSON file.
    """
    check_record(record)
    with open(nfile, "w", newline="\n") as f:
        f.write(dumps_record(record))


def read_model_file(file: str, kind: Optional[str] = None) -> dict:
    """
    Reads a model JSON file and validates its header.

    Parameters
    ----------
    file: str
        Path to file to be read
    kind: str (default=None)
        The expected model kind
    """
    with open(file) as f:
        record = json.load(f)
    check_record(record, kind)
    return record
