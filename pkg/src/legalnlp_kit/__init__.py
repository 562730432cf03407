"""Brazilian legal text NLP pipeline at desk scale.

Cleaning with entity masking, two-pass collocation detection, Word2Vec /
Doc2Vec / FastText embeddings trained by negative sampling, embedding
queries with PCA projection, and a softmax classification demo.
"""

from .classify import (
    ClassifierConfig,
    ClassifierModel,
    EvalReport,
    evaluate,
    featurize,
    fit_classifier,
    make_demo_corpus,
    metrics_from_confusion,
    predict,
    run_demo,
)
from .cleaner import ENTITY_NAMES, CleanConfig, clean, clean_bert, tokenize
from .corpus import (
    MASK_TOKEN,
    TextRecord,
    Vocabulary,
    count_vocab,
    ingest,
    mlm_mask,
    train_test_split,
    write_records,
)
from .embeddings import (
    VARIANTS,
    EmbeddingModel,
    TrainConfig,
    fasttext_vector,
    infer_doc_vector,
    load_model,
    load_text,
    save_model,
    save_text,
    subword_ngrams,
    train,
)
from .exceptions import (
    CorpusFormatError,
    EmptyCorpusError,
    LegalNlpError,
    ModelFormatError,
)
from .phraser import (
    PhraseModel,
    apply_all,
    fit_two_pass,
    load_models,
    plain_scorer,
    save_models,
)
from .query import (
    KeyedVectors,
    PcaResult,
    cosine,
    most_similar,
    neighborhood_report,
    pca_fit,
    pca_project,
)

__version__ = "0.1.0"

__all__ = [
    "CleanConfig",
    "ClassifierConfig",
    "ClassifierModel",
    "CorpusFormatError",
    "EmbeddingModel",
    "EmptyCorpusError",
    "ENTITY_NAMES",
    "EvalReport",
    "KeyedVectors",
    "LegalNlpError",
    "MASK_TOKEN",
    "ModelFormatError",
    "PcaResult",
    "PhraseModel",
    "TextRecord",
    "TrainConfig",
    "VARIANTS",
    "Vocabulary",
    "apply_all",
    "clean",
    "clean_bert",
    "cosine",
    "count_vocab",
    "evaluate",
    "fasttext_vector",
    "featurize",
    "fit_classifier",
    "fit_two_pass",
    "infer_doc_vector",
    "ingest",
    "load_model",
    "load_models",
    "load_text",
    "make_demo_corpus",
    "mask_entities",
    "metrics_from_confusion",
    "mlm_mask",
    "most_similar",
    "neighborhood_report",
    "pca_fit",
    "pca_project",
    "plain_scorer",
    "predict",
    "run_demo",
    "save_model",
    "save_models",
    "save_text",
    "subword_ngrams",
    "tokenize",
    "train",
    "train_test_split",
    "write_records",
]
