"""LangGraph state machine running the stages end to end.

```
START -> synth -> train -> infer --+--> assess -> aggregate --+--> score -> END
                                   |                          |
                                   +--> flood_lines ----------+
```
"""

from __future__ import annotations

import logging
import uuid
from typing import Optional

from langgraph.checkpoint.memory import MemorySaver
from langgraph.graph import END, StateGraph
from langgraph.graph.state import CompiledStateGraph

from floodsight.config import PipelineConfig
from floodsight.pipeline.nodes import (
    aggregate_node,
    assess_node,
    flood_lines_node,
    infer_node,
    route_task,
    score_node,
    synth_node,
    train_node,
)
from floodsight.pipeline.state import PipelineState

logger = logging.getLogger(__name__)


def create_pipeline_graph() -> CompiledStateGraph:
    """Compile the pipeline graph with an in-memory checkpointer keyed by run id."""
    workflow = StateGraph(PipelineState)

    workflow.add_node("synth", synth_node)
    workflow.add_node("train", train_node)
    workflow.add_node("infer", infer_node)
    workflow.add_node("assess", assess_node)
    workflow.add_node("aggregate", aggregate_node)
    workflow.add_node("flood_lines", flood_lines_node)
    workflow.add_node("score", score_node)

    workflow.set_entry_point("synth")
    workflow.add_edge("synth", "train")
    workflow.add_edge("train", "infer")
    workflow.add_conditional_edges(
        "infer",
        route_task,
        {
            "assess": "assess",
            "flood_lines": "flood_lines",
        },
    )
    workflow.add_edge("assess", "aggregate")
    workflow.add_edge("aggregate", "score")
    workflow.add_edge("flood_lines", "score")
    workflow.add_edge("score", END)

    return workflow.compile(checkpointer=MemorySaver())


def run_pipeline(
    config: PipelineConfig,
    task: str = "damage",
    dataset_dir: Optional[str] = None,
    run_id: Optional[str] = None,
) -> PipelineState:
    """Run every stage for ``task`` and return the final state.

    Args:
        config: Run configuration
        task: ``damage`` or ``segment``
        dataset_dir: Existing dataset to use instead of synthesizing one
        run_id: Checkpointer thread id, random by default
    """
    graph = create_pipeline_graph()
    initial: PipelineState = {
        "config": config,
        "task": task,
        "synthesize": dataset_dir is None,
        "dataset_dir": dataset_dir,
        "completed": [],
    }
    thread = {"configurable": {"thread_id": run_id or uuid.uuid4().hex}}
    logger.info("Starting %s pipeline run %s", task, thread["configurable"]["thread_id"])
    return graph.invoke(initial, config=thread)
