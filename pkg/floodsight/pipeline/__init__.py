"""LangGraph orchestration of the floodsight stages."""

from floodsight.pipeline.builder import create_pipeline_graph, run_pipeline
from floodsight.pipeline.state import PipelineState

__all__ = ["create_pipeline_graph", "run_pipeline", "PipelineState"]
