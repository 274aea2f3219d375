"""cogniprof: occupation inference from noisy short text.

The pipeline cleans and tokenizes posts, extracts lexicon-based linguistic
features, maps them onto the five personality traits, scores authors
against occupations with three fused weighting modules, and indexes the
occupation boundaries in a weight-layered rectangle tree for top-k
retrieval.
"""

from .coherence import CoherenceParams, coherence_weight, tune
from .corpus import CleanPost, RawPost, SlangTable, clean_corpus, ingest_corpus, \
    reduce_noise, tokenize
from .errors import CogniprofError
from .evaluation import EvalReport, bench_index, evaluate, history_ablation, run_variant
from .gradboost import BoostEnsemble, BoostModule, init_constant
from .icf import CurveModule, IsotonicFit, WeightedPoint, curve_weight, pava_fit
from .lessn import TRAITS, CognitiveFeatureVector, CorrelationMatrix, CorpusStats, \
    Lexicon, LinguisticFeatureVector, extract_linguistic, load_bundled_lexicons, \
    load_bundled_matrix, load_lexicon, map_to_cognitive, pearson, train_correlation
from .pipeline import ModelBundle, PipelineConfig, load_model, save_model, train_pipeline
from .rw_tree import ActuatorConfig, OccupationNode, OccupationRectangle, OrientPoint, \
    RTree, RwTree, actuator_interval
from .segmentation import Phrase, TermGraph, build_term_graph, edge_score, \
    extract_segments, scp_score
from .svm import AuthorRepresentation, ClusterModule, DualSolution, KernelParams, \
    SphereSolution, build_representations, cluster_weight, kernel, solve_dual, svc_spheres
from .synthetic import SyntheticCorpus, SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
