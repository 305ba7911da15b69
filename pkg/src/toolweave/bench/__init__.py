"""Seeded QA benchmark generation, factual-retrieval prompt emission, and
accuracy evaluation."""

from .answers import (DecimalAnswer, DecimalListAnswer, GoldAnswer, IntegerAnswer,
                      IntListAnswer, MatrixAnswer, SpecialAnswer, TextAnswer,
                      answer_from_dict, answer_to_dict, gold_text)
from .evaluate import EvalRecord, EvalReport, evaluate
from .fact import FACT_TOPICS, FactPair, emit_fact_prompts, load_fact_pairs
from .generator import (ALL_TEMPLATE_IDS, QAPair, build_template, gen_randomqa,
                        generate_pair, qa_from_dict, qa_to_dict, read_qa_file,
                        write_qa_file)
from .matching import answer_match

__all__ = [
    "ALL_TEMPLATE_IDS", "DecimalAnswer", "DecimalListAnswer", "EvalRecord",
    "EvalReport", "FACT_TOPICS", "FactPair", "GoldAnswer", "IntegerAnswer",
    "IntListAnswer", "MatrixAnswer", "QAPair", "SpecialAnswer", "TextAnswer",
    "answer_from_dict", "answer_match", "answer_to_dict", "build_template",
    "emit_fact_prompts", "evaluate", "gen_randomqa", "generate_pair",
    "gold_text", "load_fact_pairs", "qa_from_dict", "qa_to_dict",
    "read_qa_file", "write_qa_file",
]
