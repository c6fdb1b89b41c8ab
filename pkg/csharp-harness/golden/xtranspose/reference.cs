public static class xTransposeUtil
{
    public static int[,] xTranspose(int[,] x)
    {
        var r = new int[x.GetLength(1), x.GetLength(0)];
        for (int i = 0; i < x.GetLength(0); i++)
            for (int j = 0; j < x.GetLength(1); j++)
                r[j, i] = x[i, j];
        return r;
    }
}
