"""Population anomaly detection: find distribution shifts whose samples
individually look normal, then rank the samples driving the shift.

Workflow: featurize anticipated records (data), train an adversarial
autoencoder whose encoder gaussianizes them (aae), KS-test the latent
projection of new data (detect), fine-tune the discriminator to rank
individual samples (rank), and score against ground truth (metrics).
synth provides mixtures with known anomaly posteriors and a DNS
exfiltration emulator for end-to-end validation.
"""

from .aae import (
    AaeModel,
    AaeTrainingLog,
    AveragedNets,
    adversarial_epoch,
    decode,
    encode,
    gaussianization_gate,
    load_bundle,
    save_bundle,
    train_aae,
)
from .data import (
    DOMAIN_ALPHABET,
    BucketResult,
    Dataset,
    FeatureSchema,
    FieldSpec,
    bucket,
    featurize,
    infer_schema,
    matrix_dataset,
    read_records,
    vector_schema,
    write_records,
)
from .detect import (
    DetectionReport,
    LatentProjection,
    combine_scores,
    detect,
    kolmogorov_sf,
    ks_critical_value,
    ks_one_sample_normal,
    novelty_matrix,
    write_novelty_csv,
)
from .errors import ConfigError, DataError, NumericalError
from .metrics import CurvePoint, pr_curve, roc, write_curve_csv
from .nn import (
    DenseLayer,
    Mlp,
    OptimizerState,
    TrainConfig,
    backward,
    forward,
    load_mlp,
    loss_and_grad,
    save_mlp,
    step,
)
from .rank import (
    RankedSample,
    RankingRun,
    beta_to_alpha,
    exact_alpha_beta,
    rank,
    write_ranking_csv,
)
from .synth import (
    LABEL_CHARS,
    ArcGaussian,
    ComponentMixture,
    DiagonalGaussian,
    DomainProfile,
    ExfilConfig,
    ExfilResult,
    GroundTruthMixture,
    IndependentCategorical,
    MixtureSample,
    categorical_background,
    categorical_schema,
    domain_schema,
    emulate_exfiltration,
    generate_domains,
    mixture_categorical_shift,
    mixture_gaussian_clusters,
    mixture_separated_cluster,
    mixture_two_arcs,
    sample_mixture,
    two_moons_background,
)

__version__ = "0.1.0"
