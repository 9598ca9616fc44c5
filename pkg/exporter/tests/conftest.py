import json
import random

import pytest
import torch
from transformers import BertConfig, BertForTokenClassification, BertTokenizerFast

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A local word-piece token classifier, so tests never touch the network."""
    root = tmp_path_factory.mktemp("tiny_model")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list(LETTERS) + ["##" + c for c in LETTERS] + [".", "!", "?", ",", "##."]
    (root / "vocab.txt").write_text("\n".join(vocab) + "\n")
    tokenizer = BertTokenizerFast(vocab_file=str(root / "vocab.txt"), do_lower_case=True)
    model_dir = root / "model"
    tokenizer.save_pretrained(model_dir)

    torch.manual_seed(7)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=600,
        num_labels=2,
    )
    BertForTokenClassification(config).save_pretrained(model_dir)
    return str(model_dir)


def make_records(count, seed, min_words=8, max_words=40):
    rng = random.Random(seed)
    records = []
    for i in range(count):
        n = rng.randint(min_words, max_words)
        words = []
        for w in range(n):
            word = "".join(rng.choice(LETTERS) for _ in range(rng.randint(2, 6)))
            if rng.random() < 0.15 or w == n - 1:
                word += "."
            words.append(word)
        records.append({"id": f"fx-{i:03d}", "text": " ".join(words), "label": rng.randint(0, n)})
    return records


def write_dataset(path, records):
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")


@pytest.fixture(scope="session")
def fixture_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    records = make_records(50, seed=11)
    path = root / "fixture50.jsonl"
    write_dataset(path, records)
    return path, records
