"""Non-interactive multi-client dynamic searchable symmetric encryption.

The owner indexes documents into per-keyword storage chains and publishes a
matrix per keyword that hides the chain's newest key. Users holding the
master secret build tokens for ``(keyword, [genesis, now])`` on their own;
the server recovers the head key by a trace computation and walks the chain.
"""

from .errors import NimsError
from .params import SchemeParams
from .roles import (
    AddBatch,
    Document,
    EncryptedDatabase,
    OwnerState,
    SearchStats,
    SearchToken,
    owner_add,
    owner_delete,
    owner_setup,
    server_apply_add,
    server_apply_delete,
    server_search,
    user_decrypt_results,
    user_search_token,
)

__all__ = [
    "AddBatch",
    "Document",
    "EncryptedDatabase",
    "NimsError",
    "OwnerState",
    "SchemeParams",
    "SearchStats",
    "SearchToken",
    "owner_add",
    "owner_delete",
    "owner_setup",
    "server_apply_add",
    "server_apply_delete",
    "server_search",
    "user_decrypt_results",
    "user_search_token",
]
__version__ = "0.1.0"
