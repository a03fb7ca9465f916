"""Independent escape-time oracle for the butterfly raster.

This is a direct, deliberately naive transliteration of the published
rendering loop: trig products written out longhand, the flux update applied
through dummy variables, the angle taken with atan2 each pass.  It is kept
free of any sglap imports so raster tests compare two genuinely separate
implementations.  Do not "clean it up" -- its value is being line-for-line
faithful, and the package engines are required to match it bitwise.
"""

import math


def reference_cell(al, be, lmd, th=10.0, num_iter=20):
    count = 0
    while abs(lmd) < th:
        count += 1
        x = math.cos(2 * math.pi * al)
        xs = math.sin(2 * math.pi * al)
        y = math.cos(2 * math.pi * be)
        ys = math.sin(2 * math.pi * be)
        cosaplusb = x * y - xs * ys
        cosa2plusb = (x * x - xs * xs) * y - 2 * xs * x * ys
        sinaplusb = xs * y + x * ys
        sina2plusb = 2 * xs * x * y + ys * (x * x - xs * xs)
        A = 16 * lmd * lmd - (32 + 4 * x) * lmd + 15 + 4 * x + cosaplusb
        D = -(lmd * lmd * lmd) + 3 * lmd * lmd - 45 / 16 * lmd + 13 / 16 - y / 32
        re_psi = (
            (1 - lmd) * (1 - lmd)
            - 1 / 16
            + (1 - lmd) / 4 * (2 * x + cosa2plusb)
            + 1 / 16 * (x * x - xs * xs + 2 * cosaplusb)
        )
        im_psi = -(1 - lmd) / 4 * (2 * xs + sina2plusb) - 1 / 16 * (
            2 * x * xs + 2 * sinaplusb
        )
        theta = math.atan2(im_psi, re_psi)
        if count == num_iter:
            return True, -1
        den = 16 * math.sqrt(re_psi * re_psi + im_psi * im_psi)
        num = A - 64 * D * (1 - lmd)
        if den == 0.0:
            lmd = math.nan if num == 0.0 else math.copysign(math.inf, num)
        else:
            lmd = 1 + num / den
        al_dummy = al
        be_dummy = be
        al = (3 * al_dummy + be_dummy + 3 * theta / 2 / math.pi) % 1.0
        be = (3 * be_dummy + al_dummy - 3 * theta / 2 / math.pi) % 1.0
    return False, count
