# Compiled statevector hot loops; mirrors _kernels_py exactly.

from libc.math cimport sqrt

IMPL = "c"


def apply_flip(double complex[::1] amps, long long flip_bit, long long ctrl_mask,
               long long ctrl_val):
    cdef Py_ssize_t n = amps.shape[0]
    cdef long long sel = ctrl_mask | flip_bit
    cdef Py_ssize_t i
    cdef double complex tmp
    with nogil:
        for i in range(n):
            if (i & sel) == ctrl_val:
                tmp = amps[i]
                amps[i] = amps[i | flip_bit]
                amps[i | flip_bit] = tmp


def apply_phase(double complex[::1] amps, long long target_bit, long long ctrl_mask,
                long long ctrl_val, double complex factor):
    cdef Py_ssize_t n = amps.shape[0]
    cdef long long sel = ctrl_mask | target_bit
    cdef long long want = ctrl_val | target_bit
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            if (i & sel) == want:
                amps[i] = amps[i] * factor


def apply_h(double complex[::1] amps, long long target_bit, long long ctrl_mask,
            long long ctrl_val):
    cdef Py_ssize_t n = amps.shape[0]
    cdef long long sel = ctrl_mask | target_bit
    cdef double r = 1.0 / sqrt(2.0)
    cdef Py_ssize_t i
    cdef double complex a0, a1
    with nogil:
        for i in range(n):
            if (i & sel) == ctrl_val:
                a0 = amps[i]
                a1 = amps[i | target_bit]
                amps[i] = (a0 + a1) * r
                amps[i | target_bit] = (a0 - a1) * r


def apply_swap(double complex[::1] amps, long long bit_a, long long bit_b,
               long long ctrl_mask, long long ctrl_val):
    cdef Py_ssize_t n = amps.shape[0]
    cdef long long sel = ctrl_mask | bit_a | bit_b
    cdef long long want = ctrl_val | bit_a
    cdef long long pair = bit_a | bit_b
    cdef Py_ssize_t i
    cdef double complex tmp
    with nogil:
        for i in range(n):
            if (i & sel) == want:
                tmp = amps[i]
                amps[i] = amps[i ^ pair]
                amps[i ^ pair] = tmp
