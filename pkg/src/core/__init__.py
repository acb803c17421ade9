# Point spaces, kernels, Fock representation and Itô formulae
