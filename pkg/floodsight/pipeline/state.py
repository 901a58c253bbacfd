"""State carried between pipeline nodes."""

from typing import Annotated, Dict, List, Literal, Optional, TypedDict
import operator

from floodsight.config import PipelineConfig


class PipelineState(TypedDict, total=False):
    """Artifacts produced so far in one pipeline run.

    Attributes:
        config: Run configuration (read-only for nodes)
        task: ``damage`` (assess + aggregate) or ``segment`` (flood lines)
        synthesize: Generate the dataset first instead of using an existing one
        dataset_dir: Dataset root with manifest.json
        checkpoint: Trained model archive
        history: Per-epoch history CSV
        predictions: Predicted mask GeoTIFFs on the validation split
        truths: Matching truth masks
        buildings: Buildings GeoJSON with costs
        summaries: Summary exports keyed by format
        flood_lines: Flood line GeoJSON files
        metrics: Metrics JSON
        completed: Node names in execution order (append-only)
    """

    config: PipelineConfig
    task: Literal["damage", "segment"]
    synthesize: bool
    dataset_dir: Optional[str]
    checkpoint: Optional[str]
    history: Optional[str]
    predictions: List[str]
    truths: List[str]
    buildings: Optional[str]
    summaries: Dict[str, str]
    flood_lines: List[str]
    metrics: Optional[str]
    completed: Annotated[List[str], operator.add]
