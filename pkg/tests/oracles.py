"""Frozen reference values.

[DERIVED] entries were computed once, independently of the package, with
sympy (exact differentiation of the profile formula, exact binomials) and
mpmath at 30 digits, then pasted here. [PAPER] entries restate claims that
the source text makes explicitly; they carry no numbers of their own.
"""

from fractions import Fraction

# [DERIVED] oscillatory single-term profile
# alpha=0.4, ell=1.5, amp_cos=0.1, amp_sin=0.05, omega=2, ell_inf=1
OSC_TERM = dict(alpha=0.4, ell=1.5, amp_cos=0.1, amp_sin=0.05, omega=2.0, ell_inf=1.0)
# x: (q, v, v')
OSC_VALUES = {
    0.003: (0.34609694434625413283, 35.908916806016210545, -22155.425273468578697),
    0.7: (3.5832093695181147778, 3.4630748393074820865, -2.6133444243171947427),
    2.5: (7.2032534486292725755, 1.3494263125449326163, -0.21435190913990519858),
    4.2: (9.3915272599472212504, 1.2923063537336853997, 0.045452288353389804078),
    130.0: (149.87569499222490105, 1.0552849751901307554, 0.00031112430681417189372),
}

# [DERIVED] two-term full profile (alpha, ell) = (0.7, 10), (0.3, 0.1)
TWO_TERMS = ((0.7, 10.0), (0.3, 0.1))
TWO_VALUES = {
    0.003: (0.16826916142992086705, 24.040583482828667539, -3856.2804333648202311),
    0.7: (3.5181979453237136868, 3.4767141429387618338, -1.2077991194244487229),
    2.5: (8.7887827199574393729, 2.6207776786865487718, -0.21130309939056996293),
    4.2: (13.006475424641333990, 2.3703222907070255732, -0.10483899315049207131),
    130.0: (218.89703838671091877, 1.4698622520904218254, -0.0011046377551011415942),
}

# [DERIVED] alpha=0.5, ell=1, amp_cos=0.1, omega=2, ell_inf=1 at x=1: 1 + 2*1.1
OSC_AT_ONE = 3.2

# [DERIVED] Grunwald-Letnikov weights (-1)**j C(1/2, j), exact rationals
GL_WEIGHTS_HALF = (
    Fraction(1),
    Fraction(-1, 2),
    Fraction(-1, 8),
    Fraction(-1, 16),
    Fraction(-5, 128),
    Fraction(-7, 256),
)

# [DERIVED] small-scale constant alpha * ell**(alpha-1) * Gamma(1-alpha), ell=1
SMALL_SCALE_CONSTANT = {
    0.3: 0.3894165997942673357,
    0.5: 0.88622692545275801365,
}

# [DERIVED] unit-scale moment int_0^1 du / (u + u**a / a) = ln(1 + a) / (1 - a)
UNIT_MOMENT = {
    0.3: 0.37480609209641578862,
    0.5: 0.81093021621632876396,
    0.9: 6.4185388617239477599,
    0.99: 68.813463873640102737,
}

# [DERIVED] one-sided multipliers (i k)**alpha, principal branch; Weyl is the conjugate
LIOUVILLE_MULT = {
    (1, 0.3): complex(0.89100652418836786236, 0.45399049973954679156),
    (1, 0.5): complex(0.7071067811865475244, 0.7071067811865475244),
    (1, 0.9): complex(0.15643446504023086901, 0.98768834059513772619),
    (2, 0.3): complex(1.0969577045083811131, 0.55892786746600970395),
    (2, 0.5): complex(1.0, 1.0),
    (2, 0.9): complex(0.29191703379189344798, 1.8430916142630129973),
    (4, 0.3): complex(1.3505133495811568948, 0.68812092149356563777),
    (4, 0.5): complex(1.4142135623730950488, 1.4142135623730950488),
    (4, 0.9): complex(0.54473644663880328783, 3.4393305650644450488),
}

# [DERIVED] combination and kinetic symbols
DTILDE_HALF_K1 = 0.7071067811865475244j  # i sin(pi/4)
SYMMETRIC_HALF_K1 = 0.7071067811865475244  # cos(pi/4), c = cbar = 1/2
BAR_075_K1 = -0.7071067811865475244  # cos(0.75 pi)
KALPHA_075_K1 = -0.8535533905932737622  # -sin(3 pi / 8)**2
SYMMETRIC_M2_075_K2 = -4.0  # 2 cos(3 pi / 4) 2**1.5
# terms (1, 1), (0.7, 0.5): explicit D symbol and its square
EXPLICIT_TERMS = ((1.0, 1.0), (0.7, 0.5))
EXPLICIT_D = {
    1: 1.4949747468305832671j,
    2: 2.7j,
    -3: -3.8573214099741123344j,
}
EXPLICIT_KINETIC = {
    1: -2.2349494936611665342,
    2: -7.29,
    -3: -14.878928459844674006,
}
# non-quadraticity gap at alpha=0.75, k=1: |cos(0.75 pi) + sin(3 pi / 8)**2|
NONQUADRATIC_GAP = 0.1464466094067262378

# [DERIVED] integral of exp(-x**2) over the real line
SQRT_PI = 1.7724538509055160273

# [PAPER] the square of the two-term explicit derivative has seven pieces
SEVEN_PIECES = 7
# [PAPER] the three-term kinetic operator is not the square of the weighted derivative
BAR_NOT_QUADRATIC = True
# [PAPER] Liouville and Weyl derivatives annihilate constants
CONSTANTS_ANNIHILATED = True
