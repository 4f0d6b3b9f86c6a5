import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

# Paralelismo padrão: a flag --threads tem precedência sobre CAT_THREADS
CAT_THREADS = os.getenv("CAT_THREADS")

DEFAULT_SEED = int(os.getenv("CAT_SEED", "0"))
DEFAULT_ALPHA = float(os.getenv("CAT_ALPHA", "0.05"))
DEFAULT_SPLIT_FRACTION = float(os.getenv("CAT_SPLIT_FRACTION", "0.5"))
LOG_LEVEL = os.getenv("CAT_LOG_LEVEL", "WARNING")

# Testes de Monte Carlo demorados só rodam com CAT_RUN_SLOW=1
RUN_SLOW = os.getenv("CAT_RUN_SLOW", "0") == "1"


def get_threads(value: Optional[int] = None) -> int:
    """Retorna o número de workers: valor explícito, depois CAT_THREADS, depois 1."""
    if value is None:
        value = int(CAT_THREADS) if CAT_THREADS else 1
    if value < 1:
        raise ValueError(f"Número de threads deve ser >= 1, recebido {value}")
    return value
