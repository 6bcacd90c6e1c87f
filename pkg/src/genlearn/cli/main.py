"""
genlearn command line: dataset generation, model fitting and training, sampling, evaluation and
divergences. Every run that writes files writes them atomically, with a manifest.json.

Exit codes: 0 on success, 1 on a numeric failure (divergence, collapse, failed accuracy check),
2 on a usage error (bad flags, unreadable or invalid inputs).
"""
import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from genlearn.autoregressive.evaluation import dataset_loglik, perplexity, sample_ancestral
from genlearn.autoregressive.markov import MarkovModel, fit_markov
from genlearn.autoregressive.neural_ar import NeuralArModel, fit_neural_ar
from genlearn.cli.gen_data import KINDS, gen_data, parse_params
from genlearn.cli.manifest import RunManifest, StagedOutputs, metrics_lines
from genlearn.data.dataset import SequenceDataset
from genlearn.decomposition.ppca import PpcaParams, ppca_fit, ppca_loglik, ppca_sample
from genlearn.diffusion.denoiser import MODES, VARIANCES, DenoiserNet
from genlearn.diffusion.schedule import DiffusionSchedule, make_schedule
from genlearn.diffusion.training import diffusion_sample, diffusion_train
from genlearn.divergence.f_divergence import NAMED, PARAMETRIC, f_divergence, named_spec
from genlearn.divergence.game import GameSpec, game_value
from genlearn.divergence.pmf import Pmf
from genlearn.gan.gan import GanModel, gan_sample, gan_train
from genlearn.io.csv_file import read_csv_file, write_csv_file, write_samples_csv
from genlearn.io.model_file import read_model_file, tag_record, write_model_file
from genlearn.io.sequence_file import read_sequence_file, write_sequence_file
from genlearn.linear_model.linear_regression import LinRegParams, fit_linear, loglik_linear
from genlearn.linear_model.logistic_regression import (LogRegParams, fit_logistic, loglik_logistic,
                                                       predict_logistic)
from genlearn.linear_model.softmax_regression import fit_multiclass, loglik_multiclass, predict_multiclass
from genlearn.metrics.accuracy import accuracy
from genlearn.mixture.em import em_fit
from genlearn.mixture.gmm import GmmParams, gmm_loglik, gmm_sample
from genlearn.neural_networks.nn import MlpParams, loss, predict, train
from genlearn.numcore.rng import Rng
from genlearn.score.density import density_from_dict
from genlearn.score.dsm import ScoreModel, dsm_train
from genlearn.score.fisher import fisher_divergence
from genlearn.utils.config import OUT_DIR_ENV, ExperimentConfig
from genlearn.utils.exceptions import GenLearnError, InvalidArgumentError, NumericFailure
from genlearn.variational.vae import VaeModel, vae_eval, vae_sample, vae_train

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2


class RunResult:

    """
    What a handler read and which config it ran with (None for deterministic commands).
    """

    def __init__(self, inputs: List[str], cfg: Optional[ExperimentConfig] = None):
        self.inputs = inputs
        self.cfg = cfg


# -- argument helpers

def _widths(text: str) -> tuple:
    """
    Parses hidden widths such as '32,32' (an empty string gives a linear network).
    """
    try:
        return tuple(int(w) for w in text.split(",") if w.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid widths {text!r}") from None


def _probs(text: str) -> Pmf:
    try:
        return Pmf([float(v) for v in text.split(",")])
    except (ValueError, GenLearnError) as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _config(args, **extra) -> ExperimentConfig:
    if args.seed is None:
        raise InvalidArgumentError(f"'{args.command}' needs --seed.")
    return ExperimentConfig(seed=args.seed, learning_rate=args.lr, max_steps=args.steps, epochs=args.epochs,
                            batch_size=args.batch_size, momentum=args.momentum, verbose=args.verbose,
                            out_dir=args.out, **extra)


def _matrix(args) -> np.ndarray:
    """
    The numeric columns of --data (the last column is dropped with --labelled).
    """
    return read_csv_file(args.data, label=args.labelled).X


def _write_model(outputs: StagedOutputs, kind: str, record: dict) -> None:
    write_model_file(outputs.path("model.json"), tag_record(kind, record))


def _write_metrics(outputs: StagedOutputs, rows) -> None:
    outputs.write_text("metrics.jsonl", metrics_lines(rows))


def _trace_rows(trace, name: str, index: str = "epoch") -> List[dict]:
    return [{index: i, name: float(v)} for i, v in enumerate(np.asarray(trace, dtype=float))]


# -- handlers

def cmd_gen_data(args, outputs: StagedOutputs) -> RunResult:
    if args.seed is None:
        raise InvalidArgumentError("'gen-data' needs --seed.")
    ds = gen_data(args.kind, parse_params(args.param), args.seed, args.n)
    if isinstance(ds, SequenceDataset):
        write_sequence_file(outputs.path(args.output or "data.txt"), ds)
    else:
        write_csv_file(outputs.path(args.output or "data.csv"), ds)
    print(f"{args.kind}: {ds.shape()[0]} rows")
    return RunResult([])


def cmd_fit_linreg(args, outputs: StagedOutputs) -> RunResult:
    ds = read_csv_file(args.data, label=True)
    params = fit_linear(ds)
    _write_model(outputs, "linreg", params.to_dict())
    _write_metrics(outputs, [{"step": 0, "loglik": loglik_linear(params, ds)}])
    print(f"w = {params.w.tolist()}, sigma2 = {params.sigma2:.6g}")
    return RunResult([args.data])


def cmd_fit_logreg(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    ds = read_csv_file(args.data, label=True)
    params, trace = fit_logistic(ds, cfg)
    _write_model(outputs, "logreg", params.to_dict())
    _write_metrics(outputs, _trace_rows(trace, "loglik", "step"))
    print(f"w = {params.w.tolist()} ({params.stop_reason} after {params.n_steps} steps)")
    return RunResult([args.data], cfg)


def cmd_fit_multiclass(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    ds = read_csv_file(args.data, label=True)
    params, trace = fit_multiclass(ds, cfg)
    _write_model(outputs, "multiclass", params.to_dict())
    _write_metrics(outputs, _trace_rows(trace, "loglik", "step"))
    print(f"accuracy = {accuracy(ds.class_indices(), predict_multiclass(params, ds.X)):.6g}")
    return RunResult([args.data], cfg)


def cmd_fit_markov(args, outputs: StagedOutputs) -> RunResult:
    ds = read_sequence_file(args.data, args.V)
    model = fit_markov(ds, args.order, args.alpha)
    _write_model(outputs, "markov", model.to_dict())
    value = perplexity(model, ds)
    _write_metrics(outputs, [{"step": 0, "perplexity": value}])
    print(f"perplexity = {value:.6g}")
    return RunResult([args.data])


def cmd_fit_neural_ar(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    ds = read_sequence_file(args.data, args.V)
    model, trace = fit_neural_ar(ds, args.context, cfg, args.hidden, args.activation)
    _write_model(outputs, "neural_ar", model.to_dict())
    _write_metrics(outputs, _trace_rows(trace, "perplexity"))
    print(f"perplexity = {trace[-1]:.6g}")
    return RunResult([args.data], cfg)


def cmd_fit_gmm(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    state = em_fit(_matrix(args), args.components, cfg)
    _write_model(outputs, "gmm", state.params.to_dict())
    _write_metrics(outputs, _trace_rows(state.trace, "loglik", "step"))
    print(f"loglik = {state.loglik:.6f} after {state.n_steps} steps")
    return RunResult([args.data], cfg)


def cmd_fit_ppca(args, outputs: StagedOutputs) -> RunResult:
    X = _matrix(args)
    params = ppca_fit(X, args.latent)
    _write_model(outputs, "ppca", params.to_dict())
    value = ppca_loglik(params, X)
    _write_metrics(outputs, [{"step": 0, "loglik": value}])
    print(f"loglik = {value:.6f}, sigma2 = {params.sigma2:.6g}")
    return RunResult([args.data])


def cmd_train_mlp(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    ds = read_csv_file(args.data, label=True)
    if args.head == "categorical":
        out = int(ds.class_indices().max()) + 1
    else:
        out = 1
    net = MlpParams.random(Rng(cfg.seed, "mlp/init"), [ds.shape()[1], *args.hidden, out],
                           activation=args.activation, head=args.head)
    net, trace = train(net, ds, cfg)
    _write_model(outputs, "mlp", net.to_dict())
    _write_metrics(outputs, _trace_rows(trace, "loss"))
    print(f"mean_loss = {trace[-1]:.6f}")
    return RunResult([args.data], cfg)


def cmd_train_vae(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args, mc_samples=args.mc_samples)
    model, trace = vae_train(_matrix(args), args.latent, cfg, args.hidden)
    _write_model(outputs, "vae", model.to_dict())
    _write_metrics(outputs, _trace_rows(trace, "elbo"))
    print(f"elbo = {trace[-1]:.6f} nats")
    return RunResult([args.data], cfg)


def cmd_train_diffusion(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    s = make_schedule(args.T, (args.beta_min, args.beta_max))
    net, trace = diffusion_train(_matrix(args), s, cfg, args.hidden, args.mode, args.weighted,
                                 variance=args.variance)
    _write_model(outputs, "diffusion", {"denoiser": net.to_dict(), "schedule": s.to_dict()})
    _write_metrics(outputs, trace.to_dict("records"))
    print(f"eval_loss = {trace['eval_loss'].iloc[-1]:.6f}")
    return RunResult([args.data], cfg)


def cmd_train_gan(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args, generator_learning_rate=args.generator_lr)
    model, trace = gan_train(_matrix(args), cfg, args.latent, args.generator_hidden, args.discriminator_hidden)
    _write_model(outputs, "gan", model.to_dict())
    _write_metrics(outputs, trace.to_dict("records"))
    print(f"d_obj = {trace['d_obj'].iloc[-1]:.6f} bits, g_obj = {trace['g_obj'].iloc[-1]:.6f} bits")
    return RunResult([args.data], cfg)


def cmd_train_score(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    model, trace = dsm_train(_matrix(args), args.sigma2, cfg, args.hidden)
    _write_model(outputs, "score", model.to_dict())
    _write_metrics(outputs, trace.to_dict("records"))
    print(f"eval_loss = {trace['eval_loss'].iloc[-1]:.6f}")
    return RunResult([args.data], cfg)


def _load_model(record: dict):
    """
    Rebuilds the model object of a tagged record.
    """
    kind = record["kind"]
    if kind == "markov":
        return MarkovModel.from_dict(record)
    if kind == "neural_ar":
        return NeuralArModel.from_dict(record)
    if kind == "ppca":
        return PpcaParams.from_dict(record)
    if kind == "gmm":
        return GmmParams.from_dict(record)
    if kind == "vae":
        return VaeModel.from_dict(record)
    if kind == "diffusion":
        return DenoiserNet.from_dict(record["denoiser"]), DiffusionSchedule.from_dict(record["schedule"])
    if kind == "gan":
        return GanModel.from_dict(record)
    if kind == "linreg":
        return LinRegParams.from_dict(record)
    if kind in ("logreg", "multiclass"):
        return LogRegParams.from_dict(record)
    if kind == "mlp":
        return MlpParams.from_dict(record)
    return ScoreModel.from_dict(record)


def cmd_sample(args, outputs: StagedOutputs) -> RunResult:
    cfg = _config(args)
    record = read_model_file(args.model)
    kind, model = record["kind"], _load_model(record)
    rng = Rng(cfg.seed, "sample")
    if kind in ("markov", "neural_ar"):
        seqs = [sample_ancestral(model, rng, args.length) for _ in range(args.n)]
        write_sequence_file(outputs.path(args.output or "samples.txt"), SequenceDataset(seqs, model.V))
        print(f"{args.n} sequences of length {args.length}")
        return RunResult([args.model], cfg)
    if kind == "ppca":
        samples = ppca_sample(model, rng, args.n)
    elif kind == "gmm":
        samples, _ = gmm_sample(model, rng, args.n)
    elif kind == "vae":
        samples = vae_sample(model, rng, args.n)
    elif kind == "diffusion":
        samples = diffusion_sample(model[0], model[1], rng, args.n)
    elif kind == "gan":
        samples = gan_sample(model, rng, args.n)
    else:
        raise InvalidArgumentError(f"A '{kind}' model cannot be sampled.")
    write_samples_csv(outputs.path(args.output or "samples.csv"), samples)
    print(f"{args.n} samples")
    return RunResult([args.model], cfg)


def _evaluate(args, kind: str, model) -> float:
    metric = args.metric
    if kind in ("markov", "neural_ar"):
        ds = read_sequence_file(args.data, model.V)
        if metric == "perplexity":
            return perplexity(model, ds, include_first=args.include_first)
        if metric == "loglik":
            return dataset_loglik(model, ds)
    elif metric == "loglik":
        if kind == "linreg":
            return loglik_linear(model, read_csv_file(args.data, label=True))
        if kind == "logreg":
            return loglik_logistic(model.w, read_csv_file(args.data, label=True))
        if kind == "multiclass":
            ds = read_csv_file(args.data, label=True)
            return loglik_multiclass(model.w, ds.X, np.eye(model.w.shape[0])[ds.class_indices(model.w.shape[0])])
        if kind == "gmm":
            return gmm_loglik(model, _matrix(args))
        if kind == "ppca":
            return ppca_loglik(model, _matrix(args))
        if kind == "mlp":
            return -loss(model, read_csv_file(args.data, label=True))
    elif metric == "accuracy":
        ds = read_csv_file(args.data, label=True)
        if kind == "logreg":
            return accuracy(ds.class_indices(), predict_logistic(model, ds.X))
        if kind == "multiclass":
            return accuracy(ds.class_indices(), predict_multiclass(model, ds.X))
        if kind == "mlp" and model.head == "categorical":
            return accuracy(ds.class_indices(), np.argmax(predict(model, ds.X), axis=1))
    elif metric == "elbo" and kind == "vae":
        if args.seed is None:
            raise InvalidArgumentError("'evaluate --metric elbo' needs --seed.")
        return vae_eval(model, _matrix(args), args.seed).elbo
    raise InvalidArgumentError(f"The metric '{metric}' is not available for a '{kind}' model.")


def cmd_evaluate(args, outputs: StagedOutputs) -> None:
    record = read_model_file(args.model)
    value = _evaluate(args, record["kind"], _load_model(record))
    print(f"{value:.6g}")


def cmd_divergence(args, outputs: StagedOutputs) -> None:
    if args.spec == "fisher":
        if not (args.f and args.g):
            raise InvalidArgumentError("The Fisher divergence needs --f and --g density files.")
        with open(args.f) as f_file, open(args.g) as g_file:
            f, g = density_from_dict(json.load(f_file)), density_from_dict(json.load(g_file))
        print(f"{fisher_divergence(f, g):.6f} nats")
        return
    if args.p is None or args.q is None:
        raise InvalidArgumentError(f"The divergence '{args.spec}' needs --p and --q.")
    if args.spec == "gan_log":
        value, _ = game_value(args.p, args.q, GameSpec("gan_log"))
    else:
        value = f_divergence(args.p, args.q, named_spec(args.spec, args.param))
    print(f"{value:.6f} bits")


HANDLERS = {"gen-data": cmd_gen_data,
            "fit-linreg": cmd_fit_linreg,
            "fit-logreg": cmd_fit_logreg,
            "fit-multiclass": cmd_fit_multiclass,
            "fit-markov": cmd_fit_markov,
            "fit-neural-ar": cmd_fit_neural_ar,
            "fit-gmm": cmd_fit_gmm,
            "fit-ppca": cmd_fit_ppca,
            "train-mlp": cmd_train_mlp,
            "train-vae": cmd_train_vae,
            "train-diffusion": cmd_train_diffusion,
            "train-gan": cmd_train_gan,
            "train-score": cmd_train_score,
            "sample": cmd_sample,
            "evaluate": cmd_evaluate,
            "divergence": cmd_divergence}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Root seed of every random stream")
    common.add_argument("--lr", type=float, default=0.01, help="Learning rate")
    common.add_argument("--steps", type=int, default=1000, help="Maximum number of steps")
    common.add_argument("--epochs", type=int, default=100, help="Number of epochs")
    common.add_argument("--batch-size", type=int, default=32, help="Minibatch size")
    common.add_argument("--momentum", type=float, default=0.0, help="Heavy-ball momentum")
    common.add_argument("--out", default="runs", help=f"Output directory (overridden by {OUT_DIR_ENV})")
    common.add_argument("--verbose", action="store_true", help="Print progress lines")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", required=True, help="Input data file")
    data.add_argument("--labelled", action="store_true", help="The last CSV column is a label to drop")

    parser = argparse.ArgumentParser(prog="genlearn", description="Generative learning experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[common], help="Generate a synthetic dataset")
    p.add_argument("--kind", required=True, choices=sorted(KINDS))
    p.add_argument("--n", type=int, required=True, help="Number of rows or sequences")
    p.add_argument("--param", action="append", default=[], help="Parameter override key=value (repeatable)")
    p.add_argument("--output", default=None, help="File name (default data.csv or data.txt in --out)")

    sub.add_parser("fit-linreg", parents=[common, data], help="Least-squares linear regression")
    sub.add_parser("fit-logreg", parents=[common, data], help="Logistic regression by gradient ascent")
    sub.add_parser("fit-multiclass", parents=[common, data], help="Softmax regression by gradient ascent")

    for name, text in (("fit-markov", "Order-k Markov model"), ("fit-neural-ar", "Neural autoregressive model")):
        p = sub.add_parser(name, parents=[common, data], help=text)
        p.add_argument("--V", type=int, default=None, help="Alphabet size (default: inferred)")
        if name == "fit-markov":
            p.add_argument("--order", type=int, default=1)
            p.add_argument("--alpha", type=float, default=1.0, help="Additive smoothing")
        else:
            p.add_argument("--context", type=int, default=1)
            p.add_argument("--hidden", type=_widths, default=())
            p.add_argument("--activation", default="logistic")

    p = sub.add_parser("fit-gmm", parents=[common, data], help="Gaussian mixture by EM")
    p.add_argument("--components", type=int, default=2)
    p = sub.add_parser("fit-ppca", parents=[common, data], help="Probabilistic PCA in closed form")
    p.add_argument("--latent", type=int, default=1)

    p = sub.add_parser("train-mlp", parents=[common, data], help="Feed-forward network")
    p.add_argument("--hidden", type=_widths, default=(16,))
    p.add_argument("--activation", default="logistic")
    p.add_argument("--head", default="gaussian_regression", choices=["gaussian_regression", "bernoulli", "categorical"])

    p = sub.add_parser("train-vae", parents=[common, data], help="Variational autoencoder")
    p.add_argument("--latent", type=int, default=1)
    p.add_argument("--hidden", type=_widths, default=(16,))
    p.add_argument("--mc-samples", type=int, default=1)

    p = sub.add_parser("train-diffusion", parents=[common, data], help="Diffusion denoiser")
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--beta-min", type=float, default=1e-4)
    p.add_argument("--beta-max", type=float, default=0.05)
    p.add_argument("--hidden", type=_widths, default=(32, 32))
    p.add_argument("--mode", default="noise", choices=list(MODES))
    p.add_argument("--weighted", action="store_true", help="Descend on the ELBO-weighted loss")
    p.add_argument("--variance", default="beta", choices=list(VARIANCES),
                   help="Backward variance of the weighted loss")

    p = sub.add_parser("train-gan", parents=[common, data], help="Generative adversarial network")
    p.add_argument("--latent", type=int, default=1)
    p.add_argument("--generator-hidden", type=_widths, default=(16,))
    p.add_argument("--discriminator-hidden", type=_widths, default=(16,))
    p.add_argument("--generator-lr", type=float, default=None)

    p = sub.add_parser("train-score", parents=[common, data], help="Denoising score matching")
    p.add_argument("--sigma2", type=float, default=0.25)
    p.add_argument("--hidden", type=_widths, default=(32,))

    p = sub.add_parser("sample", parents=[common], help="Draw samples from a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--length", type=int, default=20, help="Sequence length (autoregressive models)")
    p.add_argument("--output", default=None)

    p = sub.add_parser("evaluate", parents=[common, data], help="Evaluate a model on data")
    p.add_argument("--model", required=True)
    p.add_argument("--metric", required=True, choices=["perplexity", "loglik", "accuracy", "elbo"])
    p.add_argument("--include-first", action="store_true", help="Count the first symbol in the perplexity")

    p = sub.add_parser("divergence", parents=[common], help="Divergence between two pmfs or densities")
    p.add_argument("--p", type=_probs, default=None, help="Comma-separated probabilities")
    p.add_argument("--q", type=_probs, default=None, help="Comma-separated probabilities")
    p.add_argument("--spec", required=True, choices=sorted([*NAMED, *PARAMETRIC, "gan_log", "fisher"]))
    p.add_argument("--param", type=float, default=None, help="gamma or alpha of a parametric family")
    p.add_argument("--f", default=None, help="JSON density record (Fisher divergence)")
    p.add_argument("--g", default=None, help="JSON density record (Fisher divergence)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code == 0 else EXIT_USAGE
    args.out = os.environ.get(OUT_DIR_ENV, args.out)
    handler = HANDLERS[args.command]
    try:
        with StagedOutputs(args.out) as outputs:
            result = handler(args, outputs)
            if result is not None:
                RunManifest(["genlearn", *argv], result.cfg, result.inputs).stage(outputs)
    except NumericFailure as err:
        print(f"genlearn {args.command}: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GenLearnError, ValueError, KeyError, OSError) as err:
        print(f"genlearn {args.command}: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
