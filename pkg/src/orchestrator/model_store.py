"""Model file persistence.

A fitted model is stored as one JSON document holding the AR-SV
parameters together with the PCA it was estimated on, so downstream
commands can project new panels onto the same components. Documents carry
``schema`` and ``model_version`` tags; fields a reader does not know are
ignored so the format can grow additively.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..analysis.estimate import ArSvModel, check_stability
from ..analysis.pca import PcModel
from ..data.panel import RatePanel, YearMonth
from ..errors import InvalidModel, MisalignedSeries
from .reports import dumps

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODEL_VERSION = 1

PathLike = Union[str, Path]


class PcaSection(BaseModel):
    """Components the factor scores are defined against."""

    model_config = ConfigDict(extra="ignore")

    maturities: List[int]
    mean_rates: List[float]
    loadings: List[List[float]]
    eigenvalues: List[float] = Field(default_factory=list)
    variance_ratio: List[float] = Field(default_factory=list)
    range: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shapes(self) -> "PcaSection":
        m = len(self.maturities)
        if len(self.mean_rates) != m or any(len(row) != m for row in self.loadings):
            raise ValueError("PCA loadings and mean_rates must match the maturities")
        return self


class ModelDocument(BaseModel):
    """On-disk form of an :class:`ArSvModel`."""

    model_config = ConfigDict(extra="ignore", populate_by_name=True)

    schema_version: int = Field(SCHEMA_VERSION, alias="schema")
    model_version: int = MODEL_VERSION
    dynamics: str = "discrete"
    d: int
    alpha: float
    beta: float
    sigma0: float
    a: List[float]
    B: List[List[float]]
    c: List[float]
    vix_scaled: List[int] = Field(default_factory=list)
    noise_scales: List[float]
    residual_cov: Optional[List[List[float]]] = None
    innovation: str = "gaussian"
    innovation_df: float = 0.0
    config_hash: str = ""
    pca: Optional[PcaSection] = None
    stability: Optional[Dict[str, Any]] = None

    @model_validator(mode="after")
    def _shapes(self) -> "ModelDocument":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {self.schema_version}")
        d = self.d
        if len(self.a) != d or len(self.c) != d or len(self.noise_scales) != d:
            raise ValueError(f"a, c and noise_scales must have length d={d}")
        if len(self.B) != d or any(len(row) != d for row in self.B):
            raise ValueError(f"B must be {d}x{d}")
        if self.pca is not None and len(self.pca.loadings) != d:
            raise ValueError(f"PCA section has {len(self.pca.loadings)} components, d={d}")
        return self

    @classmethod
    def from_model(
        cls, model: ArSvModel, pca: Optional[PcModel] = None, config_hash: str = ""
    ) -> "ModelDocument":
        pca_section = None
        if pca is not None:
            pca_section = PcaSection(
                maturities=list(pca.maturities),
                mean_rates=pca.mean_rates.tolist(),
                loadings=pca.loadings.tolist(),
                eigenvalues=pca.eigenvalues.tolist(),
                variance_ratio=pca.variance_ratio.tolist(),
                range=[str(pca.dates[0]), str(pca.dates[-1])],
            )
        return cls(
            dynamics=model.dynamics,
            d=model.d,
            alpha=model.alpha,
            beta=model.beta,
            sigma0=model.sigma0,
            a=model.a.tolist(),
            B=model.B.tolist(),
            c=model.c.tolist(),
            vix_scaled=sorted(model.vix_scaled),
            noise_scales=model.noise_scales.tolist(),
            residual_cov=model.covariance.tolist(),
            innovation=model.innovation,
            innovation_df=model.innovation_df,
            config_hash=config_hash,
            pca=pca_section,
            stability=check_stability(model).to_dict(),
        )

    def to_model(self, innovation: Optional[str] = None, innovation_df: Optional[float] = None) -> ArSvModel:
        """Rebuild the parameters, optionally swapping the innovation law."""
        return ArSvModel(
            alpha=self.alpha,
            beta=self.beta,
            a=np.array(self.a),
            B=np.array(self.B),
            c=np.array(self.c),
            vix_scaled=frozenset(self.vix_scaled),
            sigma0=self.sigma0,
            noise_scales=np.array(self.noise_scales),
            residual_cov=None if self.residual_cov is None else np.array(self.residual_cov),
            innovation=innovation or self.innovation,
            innovation_df=self.innovation_df if innovation_df is None else innovation_df,
            dynamics=self.dynamics,
        )

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, exclude_none=True)


def save_model_document(document: ModelDocument, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document.to_dict()))
    logger.info("Model written to %s", path)
    return path


def load_model_document(path: PathLike, config_hash: str = "") -> ModelDocument:
    """Read and validate a model file.

    Args:
        path: JSON model file.
        config_hash: Hash of the current data configuration; a mismatch with
            the stored hash is logged as a warning.

    Raises:
        FileNotFoundError: If the file does not exist.
        InvalidModel: If the file is not a valid model document.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidModel(f"{path}: not valid JSON ({exc})") from exc
    try:
        document = ModelDocument.model_validate(data)
        document.to_model()
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise InvalidModel(f"{path}: {where}: {first.get('msg', 'invalid')}") from exc

    if config_hash and document.config_hash and document.config_hash != config_hash:
        logger.warning(
            "Config hash mismatch: model=%s current=%s. "
            "The model was fitted on different input data.",
            document.config_hash,
            config_hash,
        )
    return document


def load_model(path: PathLike, config_hash: str = "") -> ArSvModel:
    return load_model_document(path, config_hash).to_model()


def project_panel(document: ModelDocument, panel: RatePanel) -> PcModel:
    """Scores of ``panel`` on the stored components.

    Raises:
        InvalidModel: If the document has no PCA section.
        MisalignedSeries: If the panel's maturities differ from the stored ones.
    """
    if document.pca is None:
        raise InvalidModel("model file has no PCA section")
    section = document.pca
    if tuple(panel.maturities) != tuple(section.maturities):
        raise MisalignedSeries(
            f"panel maturities {list(panel.maturities)} differ from model maturities "
            f"{section.maturities}"
        )
    mean_rates = np.array(section.mean_rates)
    loadings = np.array(section.loadings)
    scores = (panel.values - mean_rates) @ loadings.T
    eigen = np.array(section.eigenvalues) if section.eigenvalues else np.zeros(document.d)
    ratio = np.array(section.variance_ratio) if section.variance_ratio else np.zeros(document.d)
    dates: Tuple[YearMonth, ...] = tuple(panel.dates)
    return PcModel(
        dates=dates,
        maturities=tuple(panel.maturities),
        mean_rates=mean_rates,
        loadings=loadings,
        eigenvalues=eigen,
        variance_ratio=ratio,
        scores=scores,
    )
