import logging

from quotient_regularization.custom_types import RegularizerKind
from quotient_regularization.errors import ArgumentError
from quotient_regularization.regularizer_abstract import AbstractRegularizer
from quotient_regularization.regularizer_grad import GradL1OverL2
from quotient_regularization.regularizer_l1l2 import L1OverL2
from quotient_regularization.regularizer_l1sk import L1OverSK

logger = logging.getLogger(__name__)


def make_regularizer(kind: str, K: int | None = None) -> AbstractRegularizer:
    """
    Builds the regularizer named by kind ("l1_l2", "l1_sk", "l1_linf", "grad_l1_l2").
    "l1_sk" needs K; "l1_linf" is L1/S_K with K = 1.
    """
    match kind:
        case RegularizerKind.L1_OVER_L2:
            return L1OverL2()
        case RegularizerKind.L1_OVER_SK:
            if K is None:
                raise ArgumentError("regularizer 'l1_sk' requires K")
            return L1OverSK(K)
        case RegularizerKind.L1_OVER_LINF:
            if K not in (None, 1):
                logger.warning(f"[regularizer] 'l1_linf' ignores K={K}, using K=1")
            return L1OverSK(1)
        case RegularizerKind.GRAD_L1_OVER_L2:
            return GradL1OverL2()
        case _:
            raise ArgumentError(f"unknown regularizer '{kind}'")
